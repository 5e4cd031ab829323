//! Line spectra, periodograms, peak finding and the mode/quasicrystal
//! bookkeeping built on the two intrinsic frequencies `nu = 1/N` and `omega_0`.
//!
//! Periodogram frequencies are angular and reported in units of `nu`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{LmgError, Result};
use crate::evolve::{EigenSystem, TimeSeries};
use crate::model::{ground_m, GroundM};
use crate::spinspace::{BandedOperator, Basis, StateVector};

/// One Bohr line `weight * exp(i freq t)` of `<psi(t)|O|psi(t)>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    /// `E_j - E_k`.
    pub freq: f64,
    /// `conj(b_j) O_jk b_k`.
    #[serde(skip)]
    pub weight: C64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineSpectrum {
    pub lines: Vec<Line>,
}

impl LineSpectrum {
    /// Merges `+f`/`-f` and lines closer than `tol`, returning `(|f|, amplitude)`
    /// sorted by amplitude, largest first. Amplitude is `sum |weight|`.
    pub fn one_sided(&self, tol: f64) -> Vec<(f64, f64)> {
        let mut raw: Vec<(f64, f64)> = self.lines.iter().map(|l| (l.freq.abs(), l.weight.norm())).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (f, a) in raw {
            match merged.last_mut() {
                Some(last) if f - last.0 <= tol => last.1 += a,
                _ => merged.push((f, a)),
            }
        }
        merged.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
        merged
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.weight.norm()).sum()
    }
}

/// Exact Bohr lines of `<psi(t)|op|psi(t)>` with `|weight| > threshold`.
pub fn line_spectrum(eig: &EigenSystem, psi0: &StateVector, op: &BandedOperator, threshold: f64) -> Result<LineSpectrum> {
    psi0.require_basis(Basis::Sz)?;
    if psi0.dim() != eig.dim() || op.dim() != eig.dim() {
        return Err(LmgError::dims(eig.dim(), psi0.dim().max(op.dim())));
    }
    let b = eig.to_energy_basis(psi0)?.into_amplitudes();
    let op_norm = op.max_abs() * (2 * op.bandwidth() + 1) as f64;
    let bmax = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    // any pair with |b_j| |b_k| ||O|| <= threshold cannot contribute
    let support: Vec<usize> = (0..b.len()).filter(|&k| b[k].norm() * bmax * op_norm > threshold).collect();
    let applied: Vec<(usize, Vec<C64>)> = support
        .iter()
        .map(|&k| Ok((k, op.apply_slice(eig.vector(k))?)))
        .collect::<Result<_>>()?;
    let e = eig.energies();
    let mut lines = Vec::new();
    for &j in &support {
        let vj = eig.vector(j);
        for (k, ovk) in &applied {
            let ojk: C64 = vj.iter().zip(ovk).map(|(a, b)| a.conj() * b).sum();
            let w = b[j].conj() * ojk * b[*k];
            if w.norm() > threshold {
                lines.push(Line { freq: e[j] - e[*k], weight: w });
            }
        }
    }
    Ok(LineSpectrum { lines })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    None,
    #[default]
    Hann,
}

impl std::str::FromStr for Window {
    type Err = LmgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "rect" => Ok(Window::None),
            "hann" => Ok(Window::Hann),
            _ => Err(LmgError::invalid(format!("unknown window '{s}'"))),
        }
    }
}

impl Window {
    /// Periodic window of length `n`.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::Hann => (0..n).map(|j| 0.5 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub freq_over_nu: f64,
    pub height: f64,
}

/// Default fraction of the global maximum a peak must reach.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.01;

/// Shortest series accepted by [`periodogram`].
pub const MIN_PERIODOGRAM_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Bin frequencies in units of `nu`, ascending.
    pub freq_bins: Vec<f64>,
    /// Window-corrected amplitudes: a tone `A cos(w t)` shows height `A`.
    pub magnitudes: Vec<f64>,
    pub peaks: Vec<Peak>,
    /// `2 pi / T` in units of `nu`.
    pub bin_width: f64,
    pub one_sided: bool,
}

/// DFT of the windowed samples, `X_q = sum_j w_j x_j exp(-2 pi i j q / n)`.
pub fn windowed_dft(series: &TimeSeries, window: Window) -> Vec<C64> {
    let w = window.weights(series.values.len());
    let mut buf: Vec<C64> = series.values.iter().zip(&w).map(|(x, w)| x * w).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Magnitude spectrum of `series` with peaks at [`DEFAULT_PEAK_THRESHOLD`].
///
/// Real series give a one-sided spectrum; series with a non-negligible
/// imaginary part give a two-sided one (negative frequencies first).
pub fn periodogram(series: &TimeSeries, window: Window, n: usize) -> Result<Spectrum> {
    let len = series.values.len();
    if len < MIN_PERIODOGRAM_LEN {
        return Err(LmgError::invalid(format!("periodogram needs at least {MIN_PERIODOGRAM_LEN} samples, got {len}")));
    }
    if n == 0 {
        return Err(LmgError::invalid("N must be positive"));
    }
    let nu = 1.0 / n as f64;
    let bin = 2.0 * PI / series.grid.duration() / nu;
    let wsum: f64 = window.weights(len).iter().sum();
    let x = windowed_dft(series, window);
    let real = series.max_abs_imag() <= 1e-12 * series.max_abs().max(f64::MIN_POSITIVE);
    let (freq_bins, magnitudes) = if real {
        let half = len / 2;
        (0..=half)
            .map(|q| {
                let scale = if q == 0 || (len % 2 == 0 && q == half) { 1.0 } else { 2.0 };
                (q as f64 * bin, x[q].norm() * scale / wsum)
            })
            .unzip()
    } else {
        let neg = len / 2;
        (0..len)
            .map(|i| {
                let q = (i + len - neg) % len;
                ((i as f64 - neg as f64) * bin, x[q].norm() / wsum)
            })
            .unzip()
    };
    let mut spec = Spectrum { freq_bins, magnitudes, peaks: Vec::new(), bin_width: bin, one_sided: real };
    spec.peaks = find_peaks(&spec, DEFAULT_PEAK_THRESHOLD);
    Ok(spec)
}

/// Interior local maxima at or above `min_height_fraction` of the global
/// maximum, refined by a parabola through the three neighbouring bins.
pub fn find_peaks(spectrum: &Spectrum, min_height_fraction: f64) -> Vec<Peak> {
    let m = &spectrum.magnitudes;
    let global = m.iter().copied().fold(0.0, f64::max);
    if m.len() < 3 || global <= 0.0 {
        return Vec::new();
    }
    let cut = min_height_fraction * global;
    let mut peaks: Vec<Peak> = (1..m.len() - 1)
        .filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] >= cut)
        .map(|i| {
            let (a, b, c) = (m[i - 1], m[i], m[i + 1]);
            let curv = a - 2.0 * b + c;
            let delta = if curv < 0.0 { 0.5 * (a - c) / curv } else { 0.0 };
            Peak {
                freq_over_nu: spectrum.freq_bins[i] + delta * spectrum.bin_width,
                height: b - 0.25 * (a - c) * delta,
            }
        })
        .collect();
    peaks.sort_by(|p, q| q.height.total_cmp(&p.height).then(p.freq_over_nu.total_cmp(&q.freq_over_nu)));
    peaks
}

/// `nu`, `omega_0` and the two lines `|nu - omega_0|`, `|nu + omega_0|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntrinsicFrequencies {
    pub nu: f64,
    /// From the representative ground magnetization; `+-nu` when degenerate.
    pub omega0: f64,
    pub degenerate: bool,
    pub m0: f64,
    pub low: f64,
    pub high: f64,
}

impl IntrinsicFrequencies {
    /// Both signs of `omega_0` for a degenerate pair, else just `omega_0`.
    pub fn omega0_members(&self) -> Vec<f64> {
        if self.degenerate {
            vec![-self.omega0.abs(), self.omega0.abs()]
        } else {
            vec![self.omega0]
        }
    }
}

/// Tolerance for deciding that `N h` is an integer.
pub const INTEGER_NH_TOL: f64 = 1e-9;

fn integer_nh(n: usize, h: f64) -> Option<i64> {
    let nh = n as f64 * h;
    let r = nh.round();
    ((nh - r).abs() <= INTEGER_NH_TOL).then_some(r as i64)
}

fn require_broken(h: f64) -> Result<()> {
    if !(0.0..1.0).contains(&h) {
        return Err(LmgError::PreconditionViolation(format!("h = {h} is not in the broken phase [0, 1)")));
    }
    Ok(())
}

pub fn intrinsic_frequencies(n: usize, h: f64) -> Result<IntrinsicFrequencies> {
    require_broken(h)?;
    let g = ground_m(n, h)?;
    let nf = n as f64;
    let nu = 1.0 / nf;
    let m0 = g.representative();
    let mut omega0 = h - m0.twice() as f64 / nf;
    // snap the integer-Nh cases onto their exact values
    if let Some(nh) = integer_nh(n, h) {
        omega0 = if (nh - n as i64) % 2 == 0 { 0.0 } else { nu.copysign(omega0) };
    }
    Ok(IntrinsicFrequencies {
        nu,
        omega0,
        degenerate: matches!(g, GroundM::Degenerate(..)),
        m0: m0.value(),
        low: (nu - omega0).abs(),
        high: (nu + omega0).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeLabel {
    Round,
    Crescent,
    Generic,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::Round => "round",
            ModeLabel::Crescent => "crescent",
            ModeLabel::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeClass {
    pub label: ModeLabel,
    pub omega0: f64,
    pub degenerate: bool,
}

/// Round when `N` and `N h` share parity, crescent when they differ, generic
/// when `N h` is not an integer.
pub fn classify_mode(n: usize, h: f64) -> Result<ModeClass> {
    let f = intrinsic_frequencies(n, h)?;
    let label = match integer_nh(n, h) {
        Some(nh) if (nh - n as i64) % 2 == 0 => ModeLabel::Round,
        Some(_) => ModeLabel::Crescent,
        None => ModeLabel::Generic,
    };
    Ok(ModeClass { label, omega0: f.omega0, degenerate: f.degenerate })
}

/// Fields `h` in `[0, 1)` whose two lines have ratio `|nu - w0| / |nu + w0| = kappa`.
pub fn quasicrystal_h(n: usize, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(LmgError::invalid(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let nu = 1.0 / n as f64;
    let r = (1.0 - kappa) / (1.0 + kappa);
    let offsets: Vec<f64> = if n % 2 == 0 {
        (0..=(n - 2) / 2).map(|z| 2.0 * z as f64).collect()
    } else {
        (0..=(n - 3) / 2).map(|e| 2.0 * e as f64 + 1.0).collect()
    };
    Ok(offsets.into_iter().map(|o| nu * (o + r)).filter(|h| (0.0..1.0).contains(h)).collect())
}

/// Symbols of the line `y = slope x` crossing the unit grid: `U` for a
/// horizontal grid line, `D` for a vertical one, in order along the line.
pub fn cut_and_project_sequence(slope: f64, length: usize) -> String {
    let mut out = String::with_capacity(length);
    let (mut i, mut j) = (1u64, 1u64);
    while out.len() < length {
        let xv = i as f64;
        let xh = if slope > 0.0 { j as f64 / slope } else { f64::INFINITY };
        if xh < xv {
            out.push('U');
            j += 1;
        } else {
            out.push('D');
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub nu0: f64,
    /// `freq ~ nu0 * N^(-p)`.
    pub p: f64,
}

/// Least-squares fit of `ln f` against `ln N`.
pub fn frequency_scaling_fit(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(LmgError::invalid(format!("need at least 3 samples, got {}", samples.len())));
    }
    let mut ns: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(LmgError::invalid("sample sizes N must be distinct"));
    }
    if samples.iter().any(|&(n, f)| !(n > 0.0 && f > 0.0)) {
        return Err(LmgError::invalid("N and frequencies must be positive"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, f)| (n.ln(), f.ln())).collect();
    let (slope, icept) = linear_fit(&pts);
    Ok(ScalingFit { nu0: icept.exp(), p: -slope })
}

/// Ordinary least squares `y = a x + b`, returning `(a, b)`.
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{eigensystem, TimeGrid};
    use crate::model::{build_hamiltonian, LmgParams};
    use crate::spinspace::collective_operators;

    fn tones(n: usize, parts: &[(f64, f64)]) -> TimeSeries {
        let grid = TimeGrid::default_for(n);
        let nu = 1.0 / n as f64;
        let v: Vec<f64> = grid
            .points()
            .iter()
            .map(|&t| parts.iter().map(|&(a, f)| a * (f * nu * t).cos()).sum())
            .collect();
        TimeSeries::real(grid, &v, "x").unwrap()
    }

    #[test]
    fn single_tone() {
        let s = periodogram(&tones(100, &[(1.0, 1.0)]), Window::Hann, 100).unwrap();
        assert!(s.one_sided);
        assert!((s.bin_width - 0.05).abs() < 1e-12);
        assert_eq!(s.peaks.len(), 1);
        assert!((s.peaks[0].freq_over_nu - 1.0).abs() < 0.05);
        assert!((s.peaks[0].height - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_tones_keep_their_ratio() {
        let s = periodogram(&tones(100, &[(10.0, 0.6), (7.0, 1.4)]), Window::Hann, 100).unwrap();
        let p = find_peaks(&s, 0.1);
        assert_eq!(p.len(), 2);
        assert!((p[0].freq_over_nu - 0.6).abs() < 0.05 && (p[1].freq_over_nu - 1.4).abs() < 0.05);
        assert!((p[0].height / p[1].height / (10.0 / 7.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn complex_series_is_two_sided() {
        let grid = TimeGrid::default_for(50);
        let v: Vec<C64> = grid.points().iter().map(|&t| C64::from_polar(1.0, -1.4 / 50.0 * t)).collect();
        let s = periodogram(&TimeSeries::new(grid, v, "z").unwrap(), Window::Hann, 50).unwrap();
        assert!(!s.one_sided);
        assert!((s.peaks[0].freq_over_nu + 1.4).abs() < 0.05);
    }

    #[test]
    fn periodogram_rejects_bad_input() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        assert!(periodogram(&TimeSeries::real(g, &[0.0; 8], "x").unwrap(), Window::Hann, 10).is_err());
        let t = [0.0, 1.0, 2.0, 3.5];
        assert!(TimeSeries::from_points(&t, vec![C64::new(0.0, 0.0); 4], "x").is_err());
    }

    #[test]
    fn monotone_spectrum_has_no_peaks() {
        let s = Spectrum {
            freq_bins: (0..10).map(f64::from).collect(),
            magnitudes: (0..10).map(|i| 10.0 - i as f64).collect(),
            peaks: vec![],
            bin_width: 1.0,
            one_sided: true,
        };
        assert!(find_peaks(&s, 0.01).is_empty());
    }

    #[test]
    fn lines_of_simple_states() {
        let p = LmgParams::isotropic(100, 0.716).unwrap();
        let sector = p.sector();
        let eig = eigensystem(&build_hamiltonian(&p, &sector, 0.0, 0.0).unwrap()).unwrap();
        let ops = collective_operators(&sector);
        let ls = line_spectrum(&eig, &eig.state(4), &ops.sz, 1e-12).unwrap();
        assert_eq!(ls.lines.len(), 1);
        assert_eq!(ls.lines[0].freq, 0.0);
        // superposing |0>,|1>,|2> gives Sx lines at 0.6 nu and 1.4 nu only
        let mut amps = vec![C64::new(0.0, 0.0); sector.dim()];
        for k in 0..3 {
            amps[eig.permutation().unwrap()[k]] = C64::new(1.0, 0.0);
        }
        let psi = StateVector::normalized(Basis::Sz, amps).unwrap();
        let merged = line_spectrum(&eig, &psi, &ops.sx, 1e-12).unwrap().one_sided(1e-12);
        assert_eq!(merged.len(), 2);
        let mut f: Vec<f64> = merged.iter().map(|m| m.0 * 100.0).collect();
        f.sort_by(f64::total_cmp);
        assert!((f[0] - 0.6).abs() < 1e-9 && (f[1] - 1.4).abs() < 1e-9);
    }

    #[test]
    fn intrinsic_and_modes() {
        let f = intrinsic_frequencies(100, 0.716).unwrap();
        assert!((f.omega0 + 0.004).abs() < 1e-12);
        assert!((f.low * 100.0 - 1.4).abs() < 1e-9 && (f.high * 100.0 - 0.6).abs() < 1e-9);
        let r = intrinsic_frequencies(100, 0.72).unwrap();
        assert_eq!(r.omega0, 0.0);
        let c = intrinsic_frequencies(100, 0.71).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.omega0.abs(), 0.01);
        assert_eq!(c.omega0_members(), vec![-0.01, 0.01]);
        assert_eq!(classify_mode(100, 0.71).unwrap().label, ModeLabel::Crescent);
        assert_eq!(classify_mode(100, 0.72).unwrap().label, ModeLabel::Round);
        assert_eq!(classify_mode(100, 0.716).unwrap().label, ModeLabel::Generic);
        assert_eq!(classify_mode(101, 71.0 / 101.0).unwrap().label, ModeLabel::Round);
        assert!(matches!(intrinsic_frequencies(10, 1.2), Err(LmgError::PreconditionViolation(_))));
    }

    #[test]
    fn quasicrystal_fields() {
        let k = (5f64.sqrt() - 1.0) / 2.0;
        let hs = quasicrystal_h(100, k).unwrap();
        assert_eq!(hs.len(), 50);
        let r = (5f64.sqrt() - 1.0) / (5f64.sqrt() + 3.0);
        assert!((hs[26] - 0.01 * (52.0 + r)).abs() < 1e-15);
        for &h in &hs {
            let f = intrinsic_frequencies(100, h).unwrap();
            assert!((f.low.min(f.high) / f.low.max(f.high) - k).abs() < 1e-12);
        }
        assert_eq!(quasicrystal_h(7, 0.5).unwrap().len(), 3);
        let near_round = quasicrystal_h(10, 1.0 - 1e-9).unwrap();
        assert!((near_round[1] - 0.2).abs() < 1e-9);
        assert!(quasicrystal_h(10, 1.0).is_err());
    }

    #[test]
    fn fibonacci_word() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(cut_and_project_sequence(golden, 13), "DUDDUDUDDUDDU");
        let half = cut_and_project_sequence(0.5, 12);
        assert_eq!(&half[..3], &half[3..6]);
    }

    #[test]
    fn scaling_fit() {
        let exact: Vec<(f64, f64)> = [50.0, 100.0, 200.0, 400.0].iter().map(|&n| (n, 3.0 / n)).collect();
        let fit = frequency_scaling_fit(&exact).unwrap();
        assert!((fit.p - 1.0).abs() < 1e-10 && (fit.nu0 - 3.0).abs() < 1e-9);
        let flat = frequency_scaling_fit(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]).unwrap();
        assert!(flat.p.abs() < 1e-12);
        assert!(frequency_scaling_fit(&exact[..2]).is_err());
        assert!(frequency_scaling_fit(&[(1.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).is_err());
    }
}
