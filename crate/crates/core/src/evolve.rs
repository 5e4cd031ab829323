//! Exact propagation in the Dicke sector, projected mode solutions and the
//! ground-state correlation function.
//!
//! Time evolution is always spectral: `psi(t) = sum_k exp(-i E_k t) b_k |k>`.
//! Series evaluations subtract the ground energy from every phase so that
//! long times (`T ~ N` periods of `1/N`) keep full phase accuracy; observables
//! are unaffected by that global phase.

use num_complex::Complex64 as C64;

use crate::eigen;
use crate::error::{LmgError, Result};
use crate::model::{build_hamiltonian, ground_m, isotropic_energies, LmgParams};
use crate::par::Exec;
use crate::spinspace::{collective_operators, BandedHermitianOperator, BandedOperator, Basis, HalfInt, SpinSector, StateVector};

/// Spectrum and eigenvectors of a sector Hamiltonian, ascending in energy.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    energies: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    mk: Vec<f64>,
    permutation: Option<Vec<usize>>,
}

/// Diagonalizes a sector Hamiltonian (bandwidth at most 2).
pub fn eigensystem(h: &BandedHermitianOperator) -> Result<EigenSystem> {
    if !h.is_hermitian() {
        return Err(LmgError::invalid("Hamiltonian is not Hermitian"));
    }
    let compact = BandedHermitianOperator::new(h.compact())?;
    if compact.bandwidth() > 2 {
        return Err(LmgError::invalid(format!("bandwidth {} exceeds 2", compact.bandwidth())));
    }
    let dim = compact.dim();
    let eig = eigen::hermitian_banded(&compact, true)?;
    let permutation = (compact.bandwidth() == 0).then(|| {
        eig.vectors.iter().map(|v| v.iter().position(|a| a.re == 1.0).expect("coordinate vector")).collect()
    });
    let top = (dim as f64 - 1.0) / 2.0;
    let mk = eig
        .vectors
        .iter()
        .map(|v| v.iter().enumerate().map(|(m, a)| a.norm_sqr() * (top - m as f64)).sum())
        .collect();
    Ok(EigenSystem { energies: eig.values, vectors: eig.vectors, mk, permutation })
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Eigenvector `k` in the Sz basis.
    pub fn vector(&self, k: usize) -> &[C64] {
        &self.vectors[k]
    }

    pub fn state(&self, k: usize) -> StateVector {
        StateVector::from_parts_unchecked(Basis::Sz, self.vectors[k].clone())
    }

    /// `<k|Sz|k>` per level.
    pub fn mk(&self) -> &[f64] {
        &self.mk
    }

    /// `k -> m` when every eigenvector is an Sz basis vector.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Coefficients `b_k = <k|psi>`.
    pub fn to_energy_basis(&self, psi: &StateVector) -> Result<StateVector> {
        psi.require_basis(Basis::Sz)?;
        Ok(StateVector::from_parts_unchecked(Basis::Energy, self.energy_coefficients(psi.amplitudes())?))
    }

    fn energy_coefficients(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(LmgError::dims(self.dim(), x.len()));
        }
        Ok(match &self.permutation {
            Some(p) => p.iter().map(|&m| x[m]).collect(),
            None => self.vectors.iter().map(|v| v.iter().zip(x).map(|(a, b)| a.conj() * b).sum()).collect(),
        })
    }

    fn from_energy_coefficients(&self, b: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        match &self.permutation {
            Some(p) => {
                for (&m, &bk) in p.iter().zip(b) {
                    out[m] = bk;
                }
            }
            None => {
                for (v, &bk) in self.vectors.iter().zip(b) {
                    if bk == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (o, a) in out.iter_mut().zip(v) {
                        *o += a * bk;
                    }
                }
            }
        }
        out
    }

    /// `sum_k exp(-i (E_k - shift) t) b_k |k>` in the Sz basis.
    fn evolve_coefficients(&self, b: &[C64], t: f64, shift: f64) -> Vec<C64> {
        let phased: Vec<C64> = b
            .iter()
            .zip(&self.energies)
            .map(|(&bk, &e)| bk * C64::from_polar(1.0, -(e - shift) * t))
            .collect();
        self.from_energy_coefficients(&phased)
    }
}

/// `exp(-iHt) psi0`.
pub fn propagate(eig: &EigenSystem, psi0: &StateVector, t: f64) -> Result<StateVector> {
    psi0.require_basis(Basis::Sz)?;
    let b = eig.energy_coefficients(psi0.amplitudes())?;
    Ok(StateVector::from_parts_unchecked(Basis::Sz, eig.evolve_coefficients(&b, t, 0.0)))
}

/// Uniform time grid `t_j = t0 + j dt`, `j = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// `samples` points covering a record of length `tmax` (endpoint excluded).
    pub fn new(tmax: f64, samples: usize) -> Result<Self> {
        if !(tmax > 0.0 && tmax.is_finite()) || samples < 2 {
            return Err(LmgError::invalid(format!("need tmax > 0 and >= 2 samples, got {tmax}, {samples}")));
        }
        Ok(TimeGrid { t0: 0.0, dt: tmax / samples as f64, len: samples })
    }

    /// `T = 40 pi N` (20 periods of `nu = 1/N`) with 4096 samples.
    pub fn default_for(n: usize) -> Self {
        Self::new(40.0 * std::f64::consts::PI * n as f64, 4096).expect("valid default grid")
    }

    /// Validates that `points` is strictly increasing and uniform.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(LmgError::invalid("a time grid needs at least two points"));
        }
        let dt = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(LmgError::invalid("time grid must be strictly increasing"));
        }
        for (j, &t) in points.iter().enumerate() {
            if (t - (points[0] + j as f64 * dt)).abs() > 1e-9 * dt.max(t.abs() * 1e-3) {
                return Err(LmgError::invalid(format!("time grid is not uniform at index {j}")));
            }
        }
        Ok(TimeGrid { t0: points[0], dt, len: points.len() })
    }

    pub fn at(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.at(j)).collect()
    }

    /// Record length `len * dt`.
    pub fn duration(&self) -> f64 {
        self.len as f64 * self.dt
    }
}

/// Values sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(LmgError::dims(grid.len, values.len()));
        }
        Ok(TimeSeries { grid, values, label: label.into() })
    }

    /// Builds a series from explicit sample times, which must be uniform.
    pub fn from_points(t: &[f64], values: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        Self::new(TimeGrid::from_points(t)?, values, label)
    }

    pub fn real(grid: TimeGrid, values: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| C64::new(v, 0.0)).collect(), label)
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64, label: impl Into<String>) -> Self {
        TimeSeries { grid: self.grid, values: self.values.iter().map(|v| v * s).collect(), label: label.into() }
    }

    /// Largest pointwise `|a - b|`.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `<psi(t)|op|psi(t)>` for several operators on one grid.
pub fn observable_series_many(
    eig: &EigenSystem,
    psi0: &StateVector,
    ops: &[(&BandedOperator, &str)],
    grid: &TimeGrid,
    exec: Exec,
) -> Result<Vec<TimeSeries>> {
    psi0.require_basis(Basis::Sz)?;
    for (op, _) in ops {
        if op.dim() != eig.dim() {
            return Err(LmgError::dims(eig.dim(), op.dim()));
        }
    }
    let b = eig.energy_coefficients(psi0.amplitudes())?;
    let shift = eig.ground_energy();
    let rows: Vec<Vec<C64>> = exec.map_range(grid.len, |j| {
        let psi = eig.evolve_coefficients(&b, grid.at(j), shift);
        ops.iter().map(|(op, _)| op.quadratic_form(&psi).expect("dims checked")).collect()
    });
    ops.iter()
        .enumerate()
        .map(|(i, (_, label))| TimeSeries::new(*grid, rows.iter().map(|r| r[i]).collect(), *label))
        .collect()
}

pub fn observable_series(
    eig: &EigenSystem,
    psi0: &StateVector,
    op: &BandedOperator,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    observable_series_with(eig, psi0, op, grid, Exec::default())
}

pub fn observable_series_with(
    eig: &EigenSystem,
    psi0: &StateVector,
    op: &BandedOperator,
    grid: &TimeGrid,
    exec: Exec,
) -> Result<TimeSeries> {
    Ok(observable_series_many(eig, psi0, &[(op, "observable")], grid, exec)?.remove(0))
}

/// One level's share of the in-plane dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedMode {
    pub k: usize,
    pub mk: f64,
    pub nu: f64,
    pub omega_k: f64,
    pub sx0: C64,
    pub sy0: C64,
}

/// Initial values `S_{x_k}(0)`, `S_{y_k}(0)` of every projected mode.
///
/// Requires an Sz-diagonal (isotropic, unperturbed) eigensystem.
pub fn projected_init(eig: &EigenSystem, psi0: &StateVector, h: f64) -> Result<Vec<ProjectedMode>> {
    let perm = eig
        .permutation()
        .ok_or_else(|| LmgError::Unsupported("projected modes need an Sz-diagonal Hamiltonian".into()))?;
    psi0.require_basis(Basis::Sz)?;
    if psi0.dim() != eig.dim() {
        return Err(LmgError::dims(eig.dim(), psi0.dim()));
    }
    let sector = SpinSector::new(eig.dim() - 1)?;
    let n = sector.n() as f64;
    let ops = collective_operators(&sector);
    let c = psi0.amplitudes();
    let last = sector.n();
    Ok(perm
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let mut sx0 = C64::new(0.0, 0.0);
            let mut sy0 = C64::new(0.0, 0.0);
            if m < last {
                sx0 += c[m + 1] * ops.sx.get(m, m + 1);
                sy0 += c[m + 1] * ops.sy.get(m, m + 1);
            }
            if m > 0 {
                sx0 += c[m - 1] * ops.sx.get(m, m - 1);
                sy0 += c[m - 1] * ops.sy.get(m, m - 1);
            }
            let mk = sector.m_value(m);
            ProjectedMode {
                k,
                mk,
                nu: 1.0 / n,
                omega_k: h - 2.0 * mk / n,
                sx0: c[m].conj() * sx0,
                sy0: c[m].conj() * sy0,
            }
        })
        .collect())
}

impl ProjectedMode {
    /// `(S_{x_k}(t), S_{y_k}(t))`.
    pub fn at(&self, t: f64) -> (C64, C64) {
        let rot = C64::from_polar(1.0, -self.nu * t);
        let (s, c) = (self.omega_k * t).sin_cos();
        (rot * (self.sx0 * c + self.sy0 * s), rot * (self.sy0 * c - self.sx0 * s))
    }
}

pub fn projected_solution(mode: &ProjectedMode, grid: &TimeGrid) -> (TimeSeries, TimeSeries) {
    let (xs, ys): (Vec<C64>, Vec<C64>) = (0..grid.len).map(|j| mode.at(grid.at(j))).unzip();
    (
        TimeSeries { grid: *grid, values: xs, label: format!("sx_{}", mode.k) },
        TimeSeries { grid: *grid, values: ys, label: format!("sy_{}", mode.k) },
    )
}

/// Sum of the projected modes `k = 0..=cutoff`; cutoffs past the last level are clamped.
pub fn analytic_sum(modes: &[ProjectedMode], cutoff: usize, grid: &TimeGrid) -> (TimeSeries, TimeSeries) {
    let mut k_max = cutoff;
    if cutoff >= modes.len() {
        log::warn!("cutoff {cutoff} exceeds the last level {}; clamping", modes.len().saturating_sub(1));
        k_max = modes.len().saturating_sub(1);
    }
    let used = &modes[..(k_max + 1).min(modes.len())];
    let (xs, ys): (Vec<C64>, Vec<C64>) = (0..grid.len)
        .map(|j| {
            let t = grid.at(j);
            used.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |(ax, ay), m| {
                let (x, y) = m.at(t);
                (ax + x, ay + y)
            })
        })
        .unzip();
    (
        TimeSeries { grid: *grid, values: xs, label: "sx_analytic".into() },
        TimeSeries { grid: *grid, values: ys, label: "sy_analytic".into() },
    )
}

/// One spectral line `weight * exp(i freq t)` of `f_N(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationLine {
    /// `E_0 - E_j`.
    pub freq: f64,
    pub weight: f64,
}

/// `f_N(t)` for one ground-state member.
#[derive(Debug, Clone)]
pub struct CorrelationMember {
    pub m0: HalfInt,
    /// `(4/N^2) <0|exp(iHt) Sx exp(-iHt) Sx|0>` by matrix evaluation.
    pub direct: TimeSeries,
    /// The two-line closed form.
    pub closed: TimeSeries,
    pub lines: Vec<CorrelationLine>,
}

/// Ground-state correlation of `m_x = 2 Sx / N` for the isotropic model;
/// a degenerate ground level yields one entry per member.
pub fn correlation_fn(sector: &SpinSector, h: f64, grid: &TimeGrid) -> Result<Vec<CorrelationMember>> {
    let n = sector.n();
    let params = LmgParams::isotropic(n, h)?;
    let hm = build_hamiltonian(&params, sector, 0.0, 0.0)?;
    let eig = eigensystem(&hm)?;
    let ops = collective_operators(sector);
    let energies = isotropic_energies(sector, h);
    let norm = 4.0 / (n as f64 * n as f64);
    ground_m(n, h)?
        .members()
        .into_iter()
        .map(|m0| {
            let i0 = sector.index_of(m0).expect("ground M lies in the sector");
            let e0 = energies[i0];
            let ground = StateVector::basis_vector(Basis::Sz, sector.dim(), i0);
            let u = ops.sx.apply(&ground)?;
            let b = eig.energy_coefficients(&u)?;
            let direct: Vec<C64> = (0..grid.len)
                .map(|j| {
                    let w = eig.evolve_coefficients(&b, grid.at(j), e0);
                    u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<C64>() * norm
                })
                .collect();
            let lines: Vec<CorrelationLine> = [i0.checked_sub(1), (i0 < sector.n()).then_some(i0 + 1)]
                .into_iter()
                .flatten()
                .map(|j| CorrelationLine { freq: e0 - energies[j], weight: norm * ops.sx.get(i0, j).norm_sqr() })
                .collect();
            let closed: Vec<C64> = (0..grid.len)
                .map(|j| {
                    let t = grid.at(j);
                    lines.iter().map(|l| C64::from_polar(l.weight, l.freq * t)).sum()
                })
                .collect();
            Ok(CorrelationMember {
                m0,
                direct: TimeSeries::new(*grid, direct, "f_direct")?,
                closed: TimeSeries::new(*grid, closed, "f_closed")?,
                lines,
            })
        })
        .collect()
}

/// Classical precession of `(Sx, Sy, Sz)` about z by fixed-step RK4, one step per grid interval.
pub fn mean_field_ode(init: [f64; 3], h: f64, n: usize, grid: &TimeGrid) -> Result<[TimeSeries; 3]> {
    if n == 0 {
        return Err(LmgError::invalid("N must be positive"));
    }
    let nf = n as f64;
    let rhs = |s: [f64; 3]| {
        let w = 2.0 * s[2] / nf - h;
        [-w * s[1], w * s[0], 0.0]
    };
    let mut out = [Vec::with_capacity(grid.len), Vec::with_capacity(grid.len), Vec::with_capacity(grid.len)];
    let mut s = init;
    let dt = grid.dt;
    for j in 0..grid.len {
        for (o, v) in out.iter_mut().zip(s) {
            o.push(v);
        }
        if j + 1 == grid.len {
            break;
        }
        let add = |a: [f64; 3], b: [f64; 3], f: f64| [a[0] + f * b[0], a[1] + f * b[1], a[2] + f * b[2]];
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, dt / 2.0));
        let k3 = rhs(add(s, k2, dt / 2.0));
        let k4 = rhs(add(s, k3, dt));
        for i in 0..3 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let [x, y, z] = out;
    Ok([TimeSeries::real(*grid, &x, "sx_mf")?, TimeSeries::real(*grid, &y, "sy_mf")?, TimeSeries::real(*grid, &z, "sz_mf")?])
}
