//! Flag/config-file merging and range validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lmglab::spectra::{Window, DEFAULT_PEAK_THRESHOLD, MIN_PERIODOGRAM_LEN};
use serde::Deserialize;

use crate::CliError;

/// Largest sector size accepted: the dense eigenvector matrix is `(N+1)^2`.
pub const MAX_N: usize = 5000;
pub const MAX_SAMPLES: usize = 1 << 22;
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Everything is optional so that values
/// from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Anisotropy (default 1, the isotropic model).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Strength of the symmetry-breaking field (default 1/N^2).
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// In-plane direction of the field.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_n: Option<f64>,
    /// Record length (default 40 pi N).
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Highest projected mode kept in the analytic sum.
    #[arg(long)]
    pub cutoff_k: Option<usize>,
    /// Target frequency ratio for `quasicrystal` (default golden ratio).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// hann | none
    #[arg(long)]
    pub window: Option<String>,
    /// Peak threshold as a fraction of the tallest bin.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Use the three-level trial state instead of the kicked ground state.
    #[arg(long)]
    pub trial: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with keys named like the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (1 = sequential).
    #[arg(long, env = "LMGLAB_JOBS")]
    pub jobs: Option<usize>,
    /// Comma-separated N values (`sweep`, `gap`, `oracle`).
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Comma-separated h values (`sweep`, `modes`, `oracle`).
    #[arg(long, value_delimiter = ',')]
    pub h_list: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    h: Option<f64>,
    gamma: Option<f64>,
    g: Option<f64>,
    phi_n: Option<f64>,
    tmax: Option<f64>,
    samples: Option<usize>,
    cutoff_k: Option<usize>,
    kappa: Option<f64>,
    window: Option<String>,
    threshold: Option<f64>,
    trial: Option<bool>,
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
    n_list: Option<Vec<usize>>,
    h_list: Option<Vec<f64>>,
}

impl Flags {
    /// Fills unset flags from the config file, if any.
    pub fn merged(mut self) -> Result<Flags, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let f: FileConfig = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        macro_rules! fill {
            ($($k:ident),*) => { $( if self.$k.is_none() { self.$k = f.$k; } )* };
        }
        fill!(n, h, gamma, g, phi_n, tmax, samples, cutoff_k, kappa, window, threshold, out, format, jobs, n_list, h_list);
        self.trial |= f.trial.unwrap_or(false);
        Ok(self)
    }
}

/// Fully resolved, validated parameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub h: f64,
    pub gamma: f64,
    pub g: f64,
    pub phi_n: f64,
    pub tmax: f64,
    pub samples: usize,
    pub cutoff_k: usize,
    pub kappa: f64,
    pub window: Window,
    pub threshold: f64,
    pub trial: bool,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: usize,
    pub n_list: Option<Vec<usize>>,
    pub h_list: Option<Vec<f64>>,
    /// Record length was given explicitly.
    pub tmax_set: bool,
    pub n_set: bool,
    pub h_set: bool,
    pub g_set: bool,
    pub samples_set: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 || n > MAX_N {
        return Err(usage(format!("--n must be in 1..={MAX_N}, got {n}")));
    }
    Ok(())
}

pub fn check_h(h: f64) -> Result<(), CliError> {
    if !(h.is_finite() && h >= 0.0) {
        return Err(usage(format!("--h must be finite and >= 0, got {h}")));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    /// Resolves defaults. `n_default` stands in when `--n` is absent; `None`
    /// makes `--n` mandatory.
    pub fn resolve(flags: &Flags, n_default: Option<usize>, h_default: Option<f64>) -> Result<RunConfig, CliError> {
        let n = flags.n.or(n_default).ok_or_else(|| usage("--n is required"))?;
        check_n(n)?;
        let h = flags.h.or(h_default).ok_or_else(|| usage("--h is required"))?;
        check_h(h)?;
        let gamma = finite("gamma", flags.gamma.unwrap_or(1.0))?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(usage(format!("--gamma must be in [0, 1], got {gamma}")));
        }
        let nf = n as f64;
        let g = finite("g", flags.g.unwrap_or(1.0 / (nf * nf)))?;
        let phi_n = finite("phi-n", flags.phi_n.unwrap_or(0.0))?;
        let tmax = finite("tmax", flags.tmax.unwrap_or(40.0 * PI * nf))?;
        if tmax <= 0.0 {
            return Err(usage(format!("--tmax must be positive, got {tmax}")));
        }
        let samples = flags.samples.unwrap_or(4096);
        if !(MIN_PERIODOGRAM_LEN..=MAX_SAMPLES).contains(&samples) {
            return Err(usage(format!("--samples must be in {MIN_PERIODOGRAM_LEN}..={MAX_SAMPLES}, got {samples}")));
        }
        let kappa = finite("kappa", flags.kappa.unwrap_or(GOLDEN))?;
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(usage(format!("--kappa must be in (0, 1), got {kappa}")));
        }
        let window = flags
            .window
            .as_deref()
            .unwrap_or("hann")
            .parse::<Window>()
            .map_err(|e| usage(e.to_string()))?;
        let threshold = finite("threshold", flags.threshold.unwrap_or(DEFAULT_PEAK_THRESHOLD))?;
        if !(0.0..=1.0).contains(&threshold) {
            return Err(usage(format!("--threshold must be in [0, 1], got {threshold}")));
        }
        let jobs = flags.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        if let Some(ns) = &flags.n_list {
            if ns.is_empty() {
                return Err(usage("--n-list is empty"));
            }
            ns.iter().try_for_each(|&n| check_n(n))?;
        }
        if let Some(hs) = &flags.h_list {
            if hs.is_empty() {
                return Err(usage("--h-list is empty"));
            }
            hs.iter().try_for_each(|&h| check_h(h))?;
        }
        Ok(RunConfig {
            n,
            h,
            gamma,
            g,
            phi_n,
            tmax,
            samples,
            cutoff_k: flags.cutoff_k.unwrap_or(3),
            kappa,
            window,
            threshold,
            trial: flags.trial,
            out: flags.out.clone().unwrap_or_else(|| PathBuf::from("lmglab-out")),
            format: flags.format.unwrap_or(Format::Csv),
            jobs,
            n_list: flags.n_list.clone(),
            h_list: flags.h_list.clone(),
            tmax_set: flags.tmax.is_some(),
            n_set: flags.n.is_some(),
            h_set: flags.h.is_some(),
            g_set: flags.g.is_some(),
            samples_set: flags.samples.is_some(),
        })
    }

    /// Copy of `self` for one sweep point, writing into `dir`.
    pub fn at_point(&self, n: usize, h: f64, dir: &Path) -> RunConfig {
        let mut c = self.clone();
        // defaults scale with N
        let nf = n as f64;
        if !c.g_set {
            c.g = 1.0 / (nf * nf);
        }
        if !c.tmax_set {
            c.tmax = c.tmax / c.n as f64 * nf;
        }
        c.n = n;
        c.h = h;
        c.n_set = true;
        c.h_set = true;
        c.out = dir.to_path_buf();
        c.jobs = 1;
        c.n_list = None;
        c.h_list = None;
        c
    }
}
