//! `lmglab` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 oracle mismatch.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use lmglab::LmgError;
use serde_json::json;

use config::{Flags, RunConfig};
use output::{Sink, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] LmgError),
    #[error("oracle mismatch: {0}")]
    Mismatch(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(LmgError::InvalidArgument(_) | LmgError::PreconditionViolation(_) | LmgError::ResourceLimit(_)) => 1,
            CliError::Core(_) | CliError::Numeric(_) | CliError::Io { .. } => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lmglab", version, about = "Exact-diagonalization experiments on the finite-size LMG model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a localized state; exact and analytic m_x, m_y.
    Evolve(Flags),
    /// Evolve, then periodogram, exact lines and peaks.
    Spectrum(Flags),
    /// Round/crescent/generic table over an h grid, plus k=0 waveforms.
    Modes(Flags),
    /// Ground-state correlation function, direct and closed form.
    Correlation(Flags),
    /// Perturbative splitting vs g and gamma=0 splitting vs N.
    Gap(Flags),
    /// Fields with a prescribed frequency ratio and the cut-and-project word.
    Quasicrystal(Flags),
    /// Dicke sector vs full product space for N <= 10.
    Oracle(Flags),
    /// Run a subcommand over --n-list x --h-list.
    Sweep {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Evolve,
    Spectrum,
    Modes,
    Correlation,
    Gap,
    Quasicrystal,
    Oracle,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Evolve => "evolve",
            Target::Spectrum => "spectrum",
            Target::Modes => "modes",
            Target::Correlation => "correlation",
            Target::Gap => "gap",
            Target::Quasicrystal => "quasicrystal",
            Target::Oracle => "oracle",
        }
    }

    /// Fallback `(N, h)` for subcommands that do not need them explicitly.
    fn defaults(self) -> (Option<usize>, Option<f64>) {
        match self {
            Target::Modes => (None, Some(0.0)),
            Target::Quasicrystal => (None, Some(0.0)),
            Target::Oracle => (Some(4), Some(0.3)),
            _ => (None, None),
        }
    }

    fn run(self, c: &RunConfig) -> Result<Summary, CliError> {
        match self {
            Target::Evolve => commands::cmd_evolve(c),
            Target::Spectrum => commands::cmd_spectrum(c),
            Target::Modes => commands::cmd_modes(c),
            Target::Correlation => commands::cmd_correlation(c),
            Target::Gap => commands::cmd_gap(c),
            Target::Quasicrystal => commands::cmd_quasicrystal(c),
            Target::Oracle => commands::cmd_oracle(c),
        }
    }
}

fn resolve(target: Target, flags: Flags) -> Result<RunConfig, CliError> {
    let flags = flags.merged()?;
    let (n, h) = target.defaults();
    RunConfig::resolve(&flags, n, h)
}

/// Runs `target` at every `(N, h)` on a bounded pool of scoped threads; each
/// point writes into its own directory, the summary is written after join.
fn cmd_sweep(target: Target, c: &RunConfig) -> Result<Summary, CliError> {
    let ns = c.n_list.clone().unwrap_or_else(|| vec![c.n]);
    let hs = c.h_list.clone().unwrap_or_else(|| vec![c.h]);
    let points: Vec<(usize, f64, String)> = ns.iter().flat_map(|&n| hs.iter().map(move |&h| (n, h, format!("n{n}_h{h}")))).collect();
    let results: Vec<Mutex<Option<Result<Summary, CliError>>>> = points.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = c.jobs.min(points.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((n, h, dir)) = points.get(i) else { break };
                let point = c.at_point(*n, *h, &c.out.join(dir));
                let r = target.run(&point);
                *results[i].lock().expect("no poisoned slots") = Some(r);
            });
        }
    });

    let mut worst: Option<CliError> = None;
    let mut entries = Vec::new();
    for ((n, h, dir), slot) in points.iter().zip(results) {
        let r = slot.into_inner().expect("no poisoned slots").expect("every point ran");
        entries.push(match r {
            Ok(s) => json!({"n": n, "h": h, "dir": dir, "status": "ok", "summary": s}),
            Err(e) => {
                let entry = json!({"n": n, "h": h, "dir": dir, "status": "error", "exit_code": e.exit_code(), "error": e.to_string()});
                if worst.as_ref().map_or(true, |w| e.exit_code() > w.exit_code()) {
                    worst = Some(e);
                }
                entry
            }
        });
    }
    let mut sink = Sink::new(&c.out, config::Format::Csv)?;
    sink.json("sweep.json", &json!({"command": target.name(), "points": entries}))?;
    match worst {
        Some(e) => Err(e),
        None => Ok(Summary {
            command: "sweep",
            n: ns[0],
            h: hs[0],
            gamma: c.gamma,
            g: None,
            m0: None,
            nu: 1.0 / ns[0] as f64,
            omega0: None,
            mode: None,
            delta_e: None,
            peaks: Vec::new(),
            files: sink.files,
            details: Default::default(),
        }),
    }
}

fn run(cli: Cli) -> Result<Summary, CliError> {
    let (target, flags, sweep) = match cli.command {
        Command::Evolve(f) => (Target::Evolve, f, false),
        Command::Spectrum(f) => (Target::Spectrum, f, false),
        Command::Modes(f) => (Target::Modes, f, false),
        Command::Correlation(f) => (Target::Correlation, f, false),
        Command::Gap(f) => (Target::Gap, f, false),
        Command::Quasicrystal(f) => (Target::Quasicrystal, f, false),
        Command::Oracle(f) => (Target::Oracle, f, false),
        Command::Sweep { target, flags } => (target, flags, true),
    };
    if sweep {
        let mut flags = flags.merged()?;
        // the per-point values come from the lists
        let (n0, h0) = target.defaults();
        if flags.n.is_none() {
            flags.n = flags.n_list.as_ref().and_then(|v| v.first().copied()).or(n0);
        }
        if flags.h.is_none() {
            flags.h = flags.h_list.as_ref().and_then(|v| v.first().copied()).or(h0);
        }
        let c = RunConfig::resolve(&flags, None, None)?;
        return cmd_sweep(target, &c);
    }
    let c = resolve(target, flags)?;
    log::info!("{} into {}", target.name(), c.out.display());
    target.run(&c)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(s) => {
            for f in &s.files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lmglab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(LmgError::PreconditionViolation("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(LmgError::NumericFailure("x".into())).exit_code(), 2);
        assert_eq!(CliError::Numeric("x".into()).exit_code(), 2);
        assert_eq!(CliError::Mismatch("x".into()).exit_code(), 3);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["lmglab", "sweep", "gap", "--n-list", "20,40", "--phi-n", "-0.5", "--g", "-1e-3"]).unwrap();
        let Command::Sweep { target, flags } = cli.command else { panic!() };
        assert_eq!(target, Target::Gap);
        assert_eq!(flags.n_list, Some(vec![20, 40]));
        assert_eq!((flags.phi_n, flags.g), (Some(-0.5), Some(-1e-3)));
    }
}
