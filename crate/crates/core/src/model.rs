//! LMG Hamiltonians, the analytic isotropic spectrum and mean-field states.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{LmgError, Result};
use crate::spinspace::{collective_operators, BandedHermitianOperator, Basis, HalfInt, SpinSector, StateVector};

/// Parameters of `H = (lambda/N)(Sx^2 + gamma Sy^2) - h Sz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LmgParams {
    pub lambda: f64,
    pub gamma: f64,
    pub h: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Broken,
    Symmetric,
}

impl LmgParams {
    /// Ferromagnetic (`lambda = -1`) parameters, validated.
    pub fn new(n: usize, gamma: f64, h: f64) -> Result<Self> {
        if n == 0 {
            return Err(LmgError::invalid("N must be at least 1"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(LmgError::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(h >= 0.0 && h.is_finite()) {
            return Err(LmgError::invalid(format!("h must be finite and non-negative, got {h}")));
        }
        Ok(LmgParams { lambda: -1.0, gamma, h, n })
    }

    pub fn isotropic(n: usize, h: f64) -> Result<Self> {
        Self::new(n, 1.0, h)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn phase(&self) -> Phase {
        phase_of(self.h)
    }

    pub fn sector(&self) -> SpinSector {
        SpinSector::new(self.n).expect("validated N")
    }
}

pub fn phase_of(h: f64) -> Phase {
    if (0.0..1.0).contains(&h) {
        Phase::Broken
    } else {
        Phase::Symmetric
    }
}

#[inline]
fn isotropic_entry(casimir: f64, m: f64, n: f64, h: f64) -> f64 {
    -(casimir - m * m) / n - h * m
}

/// Builds `H0 - g (cos(phi_n) Sx + sin(phi_n) Sy)`.
///
/// The diagonal is written from the closed form so that the isotropic case is
/// bit-identical to [`isotropic_energies`].
pub fn build_hamiltonian(
    params: &LmgParams,
    sector: &SpinSector,
    g: f64,
    phi_n: f64,
) -> Result<BandedHermitianOperator> {
    if sector.n() != params.n {
        return Err(LmgError::invalid(format!("sector N = {} but params N = {}", sector.n(), params.n)));
    }
    let n = params.n as f64;
    let cas = sector.casimir();
    let LmgParams { lambda, gamma, h, .. } = *params;
    let aniso = lambda * (1.0 - gamma) / 4.0 / n;
    let bandwidth = if aniso != 0.0 {
        2
    } else if g != 0.0 {
        1
    } else {
        0
    };
    let field = C64::from_polar(-g / 2.0, -phi_n);
    let diag_scale = lambda * (0.5 * (1.0 + gamma));
    let op = BandedHermitianOperator::from_upper(sector.dim(), bandwidth, |i, j| match j - i {
        0 => {
            let m = sector.m_value(i);
            if diag_scale == -1.0 {
                C64::new(isotropic_entry(cas, m, n, h), 0.0)
            } else {
                C64::new(diag_scale * (cas - m * m) / n - h * m, 0.0)
            }
        }
        1 => field * sector.raising_element(j),
        _ => C64::new(aniso * sector.raising_element(j) * sector.raising_element(j - 1), 0.0),
    });
    Ok(op)
}

/// `E(m) = -(1/N)[S(S+1) - M(m)^2] - h M(m)` for every basis index.
pub fn isotropic_energies(sector: &SpinSector, h: f64) -> Vec<f64> {
    let n = sector.n() as f64;
    let cas = sector.casimir();
    (0..sector.dim()).map(|m| isotropic_entry(cas, sector.m_value(m), n, h)).collect()
}

/// `E(a) - E(b)` of the isotropic spectrum, evaluated without cancellation.
pub fn isotropic_gap(n: usize, h: f64, a: HalfInt, b: HalfInt) -> f64 {
    let diff = (a.twice() - b.twice()) as f64 / 2.0;
    let sum = (a.twice() + b.twice()) as f64 / 2.0;
    diff * (sum / n as f64 - h)
}

/// Ground-state magnetization of the isotropic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroundM {
    Unique(HalfInt),
    /// Two-fold degenerate pair, `lower < upper`.
    Degenerate(HalfInt, HalfInt),
}

impl GroundM {
    /// Member used where a single state is needed: smaller `|M|`, then smaller `M`.
    pub fn representative(&self) -> HalfInt {
        match *self {
            GroundM::Unique(m) => m,
            GroundM::Degenerate(a, b) => {
                if (b.abs(), b) < (a.abs(), a) {
                    b
                } else {
                    a
                }
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, GroundM::Degenerate(..))
    }

    pub fn members(&self) -> Vec<HalfInt> {
        match *self {
            GroundM::Unique(m) => vec![m],
            GroundM::Degenerate(a, b) => vec![a, b],
        }
    }
}

/// Relative energy tolerance below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Argmin of the isotropic spectrum over all allowed `M`.
pub fn ground_m(n: usize, h: f64) -> Result<GroundM> {
    let sector = SpinSector::new(n)?;
    if !(h >= 0.0) {
        return Err(LmgError::invalid(format!("h must be non-negative, got {h}")));
    }
    if h >= 1.0 {
        return Ok(GroundM::Unique(sector.spin()));
    }
    let energies = isotropic_energies(&sector, h);
    let mut best = sector.magnetization(0);
    let mut best_e = energies[0];
    let mut tie: Option<HalfInt> = None;
    for m in 1..sector.dim() {
        let mag = sector.magnetization(m);
        let d = isotropic_gap(n, h, mag, best);
        let tol = DEGENERACY_TOL * best_e.abs();
        if d < -tol {
            best = mag;
            best_e = energies[m];
            tie = None;
        } else if d.abs() <= tol {
            tie = Some(mag);
        }
    }
    Ok(match tie {
        Some(t) => GroundM::Degenerate(t.min(best), t.max(best)),
        None => GroundM::Unique(best),
    })
}

/// Polar and azimuthal angles of a coherent spin state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldAngles {
    pub theta: f64,
    pub phi: f64,
}

impl MeanFieldAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        MeanFieldAngles { theta, phi }
    }

    /// `(N/2)(sin t cos p, sin t sin p, cos t)`.
    pub fn polarization(&self, n: usize) -> [f64; 3] {
        let r = n as f64 / 2.0;
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [r * st * cp, r * st * sp, r * ct]
    }
}

/// Product coherent state projected on the Dicke basis.
pub fn mean_field_state(sector: &SpinSector, angles: MeanFieldAngles) -> Result<StateVector> {
    let n = sector.n();
    let (s, c) = (angles.theta / 2.0).sin_cos();
    let (ls, lc) = (s.abs().ln(), c.abs().ln());
    let mut ln_binom = 0.0;
    let mut amps = Vec::with_capacity(sector.dim());
    for m in 0..=n {
        if m > 0 {
            ln_binom += ((n - m + 1) as f64).ln() - (m as f64).ln();
        }
        let k_down = m as f64;
        let k_up = (n - m) as f64;
        // 0 * ln(0) terms are exact zeros of the product, not NaN
        let mag = if (s == 0.0 && m > 0) || (c == 0.0 && m < n) {
            0.0
        } else {
            let lu = if m == n { 0.0 } else { k_up * lc };
            let ld = if m == 0 { 0.0 } else { k_down * ls };
            (0.5 * ln_binom + lu + ld).exp()
        };
        let sign = c.signum().powi((n - m) as i32) * s.signum().powi(m as i32);
        amps.push(C64::from_polar(sign * mag, angles.phi * (m as f64 - n as f64 / 2.0)));
    }
    StateVector::normalized(Basis::Sz, amps)
}

/// `-(N/4)(sin^2 t + 2h cos t + 2g sin t cos p)`.
pub fn mean_field_energy(angles: MeanFieldAngles, h: f64, g: f64, n: usize) -> f64 {
    let (st, ct) = angles.theta.sin_cos();
    -(n as f64) / 4.0 * (st * st + 2.0 * h * ct + 2.0 * g * st * angles.phi.cos())
}

/// Stationarity residual `sin t (cos t - h) + g cos t cos p`.
pub fn mean_field_residual(angles: MeanFieldAngles, h: f64, g: f64) -> f64 {
    let (st, ct) = angles.theta.sin_cos();
    st * (ct - h) + g * ct * angles.phi.cos()
}

/// Bisection on `[lo, hi]` for a sign change of `f`, to machine resolution.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(LmgError::NumericFailure(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimizes the mean-field energy on the `phi = 0` branch.
pub fn mean_field_minimize(h: f64, g: f64) -> Result<MeanFieldAngles> {
    if !(0.0..1.0).contains(&h) {
        return Err(LmgError::invalid(format!("mean-field minimum needs 0 <= h < 1, got {h}")));
    }
    if !(g >= 0.0) {
        return Err(LmgError::invalid(format!("field strength g must be >= 0, got {g}")));
    }
    if g == 0.0 {
        return Ok(MeanFieldAngles::new(h.acos(), 0.0));
    }
    let theta = bisect(|t| mean_field_residual(MeanFieldAngles::new(t, 0.0), h, g), 0.0, std::f64::consts::FRAC_PI_2)?;
    Ok(MeanFieldAngles::new(theta, 0.0))
}

/// A near-ground state built from the isotropic ground level and its two
/// `M0 +- 1` neighbours.
#[derive(Debug, Clone)]
pub struct TrialState {
    pub state: StateVector,
    pub m0: HalfInt,
    /// Ground level was a degenerate pair; `m0` is the tie-broken member.
    pub degenerate: bool,
    /// `<H> - E0`, accumulated from exact level gaps.
    pub delta_e: f64,
}

pub fn trial_localized_state(sector: &SpinSector, h: f64) -> Result<TrialState> {
    let n = sector.n();
    if n < 3 {
        return Err(LmgError::PreconditionViolation("trial state needs N >= 3".into()));
    }
    if phase_of(h) != Phase::Broken {
        return Err(LmgError::PreconditionViolation(format!("trial state needs the broken phase, h = {h}")));
    }
    let ground = ground_m(n, h)?;
    let m0 = ground.representative();
    let up = HalfInt(m0.twice() + 2);
    let down = HalfInt(m0.twice() - 2);
    let (Some(i0), Some(iu), Some(id)) = (sector.index_of(m0), sector.index_of(up), sector.index_of(down)) else {
        return Err(LmgError::PreconditionViolation(format!("M0 = {m0} has no neighbour on both sides")));
    };
    let nf = n as f64;
    let side = 1.0 / nf.sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); sector.dim()];
    amps[i0] = C64::new((1.0 - 2.0 / nf).sqrt(), 0.0);
    amps[iu] = C64::new(side, 0.0);
    amps[id] = C64::new(side, 0.0);
    let w = side * side;
    let delta_e = w * isotropic_gap(n, h, up, m0) + w * isotropic_gap(n, h, down, m0);
    Ok(TrialState {
        state: StateVector::normalized(Basis::Sz, amps)?,
        m0,
        degenerate: ground.is_degenerate(),
        delta_e,
    })
}

/// Lifetime from `(dE/N) dt >= 1/2`.
pub fn lifetime_bound(delta_e: f64, n: usize) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(LmgError::invalid(format!("energy gap must be positive, got {delta_e}")));
    }
    Ok(n as f64 / (2.0 * delta_e))
}

/// `<Sx>, <Sy>, <Sz>` of a Dicke-sector state.
pub fn spin_expectations(sector: &SpinSector, psi: &StateVector) -> Result<[f64; 3]> {
    let ops = collective_operators(sector);
    Ok([ops.sx.expectation_re(psi)?, ops.sy.expectation_re(psi)?, ops.sz.expectation_re(psi)?])
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    use super::*;
    use crate::spinspace::parity_operator;

    fn brute_argmin(n: usize, h: f64) -> Vec<f64> {
        let s = SpinSector::new(n).unwrap();
        let e = isotropic_energies(&s, h);
        let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut out: Vec<f64> = (0..s.dim())
            .filter(|&m| (e[m] - min).abs() <= 1e-12 * min.abs())
            .map(|m| s.m_value(m))
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn isotropic_hamiltonian_is_the_analytic_diagonal() {
        for (n, h) in [(1, 0.3), (2, 0.0), (7, 0.4), (100, 0.716), (501, 0.9)] {
            let p = LmgParams::isotropic(n, h).unwrap();
            let s = p.sector();
            let hm = build_hamiltonian(&p, &s, 0.0, 0.0).unwrap();
            assert_eq!(hm.bandwidth(), 0);
            let e = isotropic_energies(&s, h);
            for m in 0..s.dim() {
                assert_eq!(hm.get(m, m).re, e[m]);
            }
        }
    }

    #[test]
    fn single_spin_energies() {
        let s = SpinSector::new(1).unwrap();
        let e = isotropic_energies(&s, 0.8);
        assert!((e[0] - (-0.4 - 0.5)).abs() < 1e-15);
        assert!((e[1] - (0.4 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_follows_parameters() {
        let s = SpinSector::new(10).unwrap();
        let iso = LmgParams::isotropic(10, 0.5).unwrap();
        assert_eq!(build_hamiltonian(&iso, &s, 1e-3, 0.0).unwrap().bandwidth(), 1);
        let p = LmgParams::new(10, 0.0, 0.5).unwrap();
        let hm = build_hamiltonian(&p, &s, 0.0, 0.0).unwrap();
        assert_eq!(hm.bandwidth(), 2);
        assert!(hm.is_hermitian());
        assert!(build_hamiltonian(&p, &SpinSector::new(11).unwrap(), 0.0, 0.0).is_err());
    }

    #[test]
    fn gamma_zero_matches_operator_algebra() {
        // -(Sx^2)/N - h Sz - g Sy through band products
        let (n, h, g) = (9, 0.37, 0.02);
        let s = SpinSector::new(n).unwrap();
        let ops = collective_operators(&s);
        let p = LmgParams::new(n, 0.0, h).unwrap();
        let hm = build_hamiltonian(&p, &s, g, FRAC_PI_2).unwrap();
        let sx2 = ops.sx.matmul(&ops.sx).unwrap();
        let want = sx2
            .scale(C64::new(-1.0 / n as f64, 0.0))
            .add_scaled(&ops.sz, C64::new(-h, 0.0))
            .unwrap()
            .add_scaled(&ops.sy, C64::new(-g, 0.0))
            .unwrap();
        for (a, b) in hm.to_dense().iter().zip(want.to_dense()) {
            assert!((a - b).norm() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn isotropic_commutes_with_sz_and_parity() {
        for n in [3, 20, 51] {
            let p = LmgParams::isotropic(n, 0.6).unwrap();
            let s = p.sector();
            let ops = collective_operators(&s);
            let hm = build_hamiltonian(&p, &s, 0.0, 0.0).unwrap();
            assert!(hm.commutator(&ops.sz).unwrap().max_abs() <= 1e-12);
            let aniso = build_hamiltonian(&LmgParams::new(n, 0.3, 0.6).unwrap(), &s, 0.0, 0.0).unwrap();
            assert!(aniso.commutator(&parity_operator(&s)).unwrap().max_abs() <= 1e-12);
            let kicked = build_hamiltonian(&p, &s, 0.1, 0.0).unwrap();
            assert!(kicked.commutator(&parity_operator(&s)).unwrap().max_abs() > 1e-3);
        }
    }

    #[test]
    fn energy_differences_at_reference_point() {
        let s = SpinSector::new(100).unwrap();
        let e = isotropic_energies(&s, 0.716);
        let at = |m: i64| e[s.index_of(HalfInt(2 * m)).unwrap()];
        assert!((at(36) - at(35) - (-0.006)).abs() < 1e-12);
        assert!((isotropic_gap(100, 0.716, HalfInt(72), HalfInt(70)) - (-0.006)).abs() < 1e-15);
    }

    #[test]
    fn ground_m_reference_values() {
        assert_eq!(ground_m(100, 0.72).unwrap(), GroundM::Unique(HalfInt(72)));
        assert_eq!(ground_m(100, 0.716).unwrap(), GroundM::Unique(HalfInt(72)));
        assert_eq!(ground_m(100, 0.71).unwrap(), GroundM::Degenerate(HalfInt(70), HalfInt(72)));
        assert_eq!(ground_m(100, 1.3).unwrap(), GroundM::Unique(HalfInt(100)));
        assert_eq!(ground_m(100, 0.0).unwrap(), GroundM::Unique(HalfInt(0)));
        assert_eq!(ground_m(5, 0.0).unwrap(), GroundM::Degenerate(HalfInt(-1), HalfInt(1)));
        assert_eq!(ground_m(5, 0.0).unwrap().representative(), HalfInt(-1));
    }

    #[test]
    fn ground_m_agrees_with_brute_force_scan() {
        for n in 1..60 {
            for k in 0..=120 {
                let h = k as f64 / 100.0;
                let got: Vec<f64> = ground_m(n, h).unwrap().members().iter().map(|m| m.value()).collect();
                assert_eq!(got, brute_argmin(n, h), "n={n} h={h}");
            }
        }
    }

    #[test]
    fn coherent_state_amplitudes() {
        let s = SpinSector::new(2).unwrap();
        let psi = mean_field_state(&s, MeanFieldAngles::new(FRAC_PI_2, 0.0)).unwrap();
        let want = [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5];
        for (a, w) in psi.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        let [sx, _, _] = spin_expectations(&s, &psi).unwrap();
        assert!((sx - 1.0).abs() < 1e-14);
        let north = mean_field_state(&SpinSector::new(9).unwrap(), MeanFieldAngles::new(0.0, 1.0)).unwrap();
        assert_eq!(north.amplitudes()[0].norm(), 1.0);
        let south = mean_field_state(&SpinSector::new(9).unwrap(), MeanFieldAngles::new(PI, 0.0)).unwrap();
        assert!((south.amplitudes()[9].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_polarization() {
        for n in [1, 5, 40, 2000] {
            let s = SpinSector::new(n).unwrap();
            for (t, p) in [(0.3, 0.0), (1.2, 2.0), (2.9, 5.5), (FRAC_PI_2, 4.0)] {
                let a = MeanFieldAngles::new(t, p);
                let psi = mean_field_state(&s, a).unwrap();
                let got = spin_expectations(&s, &psi).unwrap();
                let want = a.polarization(n);
                for k in 0..3 {
                    assert!((got[k] - want[k]).abs() < 1e-10 * n as f64, "n={n} {got:?} {want:?}");
                }
            }
        }
    }

    #[test]
    fn mean_field_energy_closed_form() {
        let n = 200;
        assert_eq!(mean_field_energy(MeanFieldAngles::new(0.0, 0.0), 0.4, 0.0, n), -(n as f64) * 0.4 / 2.0);
        let h: f64 = 0.6;
        let e = mean_field_energy(MeanFieldAngles::new(h.acos(), 0.0), h, 0.0, n);
        assert!((e + n as f64 / 4.0 * (1.0 + h * h)).abs() < 1e-12);
        // finite-size correction is S(1 - sin^2/2)/N <= 1/2
        let s = SpinSector::new(n).unwrap();
        for (t, g) in [(0.7, 0.0), (1.1, 0.01), (FRAC_PI_3, 0.1)] {
            let a = MeanFieldAngles::new(t, 0.0);
            let hm = build_hamiltonian(&LmgParams::isotropic(n, h).unwrap(), &s, g, 0.0).unwrap();
            let exact = hm.expectation_re(&mean_field_state(&s, a).unwrap()).unwrap();
            let diff = exact - mean_field_energy(a, h, g, n);
            assert!(diff.abs() <= 0.5 + 1e-9, "diff {diff}");
        }
    }

    #[test]
    fn mean_field_minimum() {
        let a = mean_field_minimize(0.5, 0.0).unwrap();
        assert!((a.theta - FRAC_PI_3).abs() < 1e-15);
        assert_eq!(mean_field_minimize(0.0, 0.0).unwrap().theta, FRAC_PI_2);
        let a = mean_field_minimize(0.5, 0.01).unwrap();
        assert!(mean_field_residual(a, 0.5, 0.01).abs() <= 1e-12);
        assert!(a.theta > FRAC_PI_3 && a.theta <= FRAC_PI_2);
        let tiny = mean_field_minimize(0.5, 1e-9).unwrap();
        assert!((tiny.theta - FRAC_PI_3).abs() < 1e-8);
        assert!(mean_field_minimize(1.2, 0.0).is_err());
        assert!(mean_field_minimize(0.5, -1.0).is_err());
    }

    #[test]
    fn trial_state_gap_and_localization() {
        for n in [10, 100, 1000] {
            let s = SpinSector::new(n).unwrap();
            let t = trial_localized_state(&s, 0.716).unwrap();
            let want = 2.0 / (n as f64 * n as f64);
            assert!((t.delta_e - want).abs() <= 1e-12 * want, "n={n}: {}", t.delta_e);
            assert!((t.state.norm() - 1.0).abs() < 1e-14);
        }
        let s = SpinSector::new(100).unwrap();
        let t = trial_localized_state(&s, 0.716).unwrap();
        let [sx, _, sz] = spin_expectations(&s, &t.state).unwrap();
        assert!((sz - 36.0).abs() < 0.01);
        assert!(sx > 1.0);
        let hm = build_hamiltonian(&LmgParams::isotropic(100, 0.716).unwrap(), &s, 0.0, 0.0).unwrap();
        let e0 = isotropic_energies(&s, 0.716).into_iter().fold(f64::INFINITY, f64::min);
        let via_expectation = hm.expectation_re(&t.state).unwrap() - e0;
        assert!((via_expectation - t.delta_e).abs() < 1e-11);
    }

    #[test]
    fn trial_state_degenerate_and_invalid() {
        let s = SpinSector::new(100).unwrap();
        let t = trial_localized_state(&s, 0.71).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.m0, HalfInt(70));
        assert!((t.delta_e - 2e-4).abs() < 1e-16);
        assert!(trial_localized_state(&SpinSector::new(2).unwrap(), 0.5).is_err());
        assert!(trial_localized_state(&s, 1.5).is_err());
        assert!(trial_localized_state(&SpinSector::new(10).unwrap(), 0.99).is_err());
    }

    #[test]
    fn lifetime() {
        assert_eq!(lifetime_bound(1.0, 2).unwrap(), 1.0);
        let n = 100usize;
        let dt = lifetime_bound(2.0 / (n * n) as f64, n).unwrap();
        assert!((dt - 2.5e5).abs() < 1e-6);
        assert!(lifetime_bound(0.0, 3).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LmgParams::new(0, 1.0, 0.5).is_err());
        assert!(LmgParams::new(4, 1.5, 0.5).is_err());
        assert!(LmgParams::new(4, 1.0, -0.1).is_err());
        assert_eq!(LmgParams::new(4, 1.0, 0.99).unwrap().phase(), Phase::Broken);
        assert_eq!(LmgParams::new(4, 1.0, 1.0).unwrap().phase(), Phase::Symmetric);
    }
}
