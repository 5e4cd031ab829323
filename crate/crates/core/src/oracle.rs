//! Brute-force checks in the full `2^N` product space.
//!
//! Basis state `b` has spin `i` down when bit `i` of `b` is set. Everything
//! here is dense and meant for `N <= 12` test fixtures only.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigen::{self, Eigen};
use crate::error::{LmgError, Result};
use crate::evolve::{correlation_fn, TimeGrid, TimeSeries};
use crate::model::LmgParams;
use crate::spinspace::SpinSector;
use crate::ssb::localize_ground_state;

/// Largest `N` for which full-space operators are built.
pub const MAX_FULL_N: usize = 12;
/// Largest `N` for which the full-space correlation function is computed.
pub const MAX_CORRELATION_N: usize = 10;

/// Dense row-major operator on the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSpaceOperator {
    dim: usize,
    data: Vec<C64>,
}

impl FullSpaceOperator {
    fn zeros(dim: usize) -> Self {
        FullSpaceOperator { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    fn add(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim {
            return Err(LmgError::dims(self.dim, x.len()));
        }
        Ok(self.data.chunks(self.dim).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn expectation(&self, x: &[C64]) -> Result<C64> {
        Ok(x.iter().zip(self.apply(x)?).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(LmgError::dims(self.dim, other.dim));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let (row, src) = (&mut out.data[i * n..(i + 1) * n], &other.data[k * n..(k + 1) * n]);
                for (o, b) in row.iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.get(i, j) - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn eigen(&self, want_vectors: bool) -> Result<Eigen> {
        eigen::hermitian_dense(self.dim, &self.data, want_vectors)
    }
}

#[derive(Debug, Clone)]
pub struct FullSpaceOperators {
    pub n: usize,
    pub sx: FullSpaceOperator,
    pub sy: FullSpaceOperator,
    pub sz: FullSpaceOperator,
}

fn check_n(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(LmgError::invalid("N must be at least 1"));
    }
    if n > cap {
        return Err(LmgError::ResourceLimit(format!("full-space N = {n} exceeds the cap {cap}")));
    }
    Ok(())
}

/// `+1/2` for an up spin at site `i`, `-1/2` for down.
fn half_spin(b: usize, i: usize) -> f64 {
    if b >> i & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Sums of single-site Pauli matrices over `N` sites, halved.
pub fn full_space_operators(n: usize) -> Result<FullSpaceOperators> {
    check_n(n, MAX_FULL_N)?;
    let dim = 1usize << n;
    let (mut sx, mut sy, mut sz) = (FullSpaceOperator::zeros(dim), FullSpaceOperator::zeros(dim), FullSpaceOperator::zeros(dim));
    for b in 0..dim {
        for i in 0..n {
            let s = half_spin(b, i);
            sz.add(b, b, C64::new(s, 0.0));
            let f = b ^ (1 << i);
            sx.add(f, b, C64::new(0.5, 0.0));
            // sigma_y |up> = i |down>, sigma_y |down> = -i |up>
            sy.add(f, b, C64::new(0.0, s));
        }
    }
    Ok(FullSpaceOperators { n, sx, sy, sz })
}

/// Dense `H = (lambda/N)(Sx^2 + gamma Sy^2) - h Sz - g (Sx cos phi + Sy sin phi)`,
/// assembled site by site.
pub fn full_space_hamiltonian(params: &LmgParams, g: f64, phi_n: f64) -> Result<FullSpaceOperator> {
    let n = params.n;
    check_n(n, MAX_FULL_N)?;
    let dim = 1usize << n;
    let (lam, gam) = (params.lambda / n as f64, params.gamma);
    let (cphi, sphi) = (phi_n.cos(), phi_n.sin());
    let mut h = FullSpaceOperator::zeros(dim);
    for b in 0..dim {
        let mut diag = lam * n as f64 * (1.0 + gam) / 4.0;
        for i in 0..n {
            let si = half_spin(b, i);
            diag -= params.h * si;
            // -g (cos phi sigma_x + sin phi sigma_y)/2 on site i
            h.add(b ^ (1 << i), b, C64::new(-g * 0.5 * cphi, -g * sphi * si));
            for j in i + 1..n {
                // (sigma_x sigma_x + gamma sigma_y sigma_y)/4 over ordered pairs
                let sj = half_spin(b, j);
                let yy = -4.0 * si * sj;
                h.add(b ^ (1 << i) ^ (1 << j), b, C64::new(lam * 2.0 * (1.0 + gam * yy) / 4.0, 0.0));
            }
        }
        h.add(b, b, C64::new(diag, 0.0));
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct FullGround {
    pub energy: f64,
    /// Lowest eigenvector.
    pub vector: Vec<C64>,
    /// Number of levels within [`FULL_DEGENERACY_TOL`] of the ground energy.
    pub multiplicity: usize,
}

impl FullGround {
    pub fn degenerate(&self) -> bool {
        self.multiplicity > 1
    }
}

/// Relative energy window for grouping full-space levels.
pub const FULL_DEGENERACY_TOL: f64 = 1e-9;

fn ground_space(values: &[f64]) -> usize {
    let e0 = values[0];
    values.iter().take_while(|&&e| e - e0 <= FULL_DEGENERACY_TOL * e0.abs().max(1.0)).count()
}

/// Ground level by eigenvalues-only QL followed by inverse iteration.
pub fn full_space_ground(params: &LmgParams, g: f64, phi_n: f64) -> Result<FullGround> {
    let h = full_space_hamiltonian(params, g, phi_n)?;
    let values = h.eigen(false)?.values;
    let multiplicity = ground_space(&values);
    if multiplicity > 1 {
        log::warn!("full-space ground level is {multiplicity}-fold degenerate");
    }
    let energy = values[0];
    let vector = inverse_iteration(&h, energy - 1e-10 * energy.abs().max(1.0))?;
    Ok(FullGround { energy, vector, multiplicity })
}

/// Dense LU with partial pivoting of `a - shift`, then three solves from a
/// fixed start vector without any spin-flip or permutation symmetry.
fn inverse_iteration(a: &FullSpaceOperator, shift: f64) -> Result<Vec<C64>> {
    let n = a.dim;
    let mut lu = a.data.clone();
    for i in 0..n {
        lu[i * n + i] -= shift;
    }
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| lu[x * n + k].norm().total_cmp(&lu[y * n + k].norm())).expect("non-empty");
        if lu[p * n + k].norm() == 0.0 {
            lu[k * n + k] = C64::new(f64::EPSILON, 0.0);
        } else if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
        }
        let d = lu[k * n + k];
        let (top, rest) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n + k + 1..k * n + n];
        for row in rest.chunks_mut(n) {
            let f = row[k] / d;
            row[k] = f;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, y) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= f * y;
            }
        }
    }
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.5 * (1.618_033_988_75 * i as f64).sin(), 0.0)).collect();
    for _ in 0..3 {
        let mut y: Vec<C64> = piv.iter().map(|&p| x[p]).collect();
        for i in 0..n {
            let s: C64 = (0..i).map(|j| lu[i * n + j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|j| lu[i * n + j] * y[j]).sum();
            y[i] = (y[i] - s) / lu[i * n + i];
        }
        let norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(LmgError::NumericFailure("inverse iteration broke down".into()));
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Ok(x)
}

/// `f_N(t)` per ground-state member, labelled by its `<Sz>` and ordered by it.
///
/// A degenerate ground level is resolved by diagonalizing `Sz` inside it.
pub fn full_space_correlation(n: usize, h: f64, grid: &TimeGrid) -> Result<Vec<(f64, TimeSeries)>> {
    check_n(n, MAX_CORRELATION_N)?;
    let params = LmgParams::isotropic(n, h)?;
    let ops = full_space_operators(n)?;
    let eig = full_space_hamiltonian(&params, 0.0, 0.0)?.eigen(true)?;
    correlation_from(&ops, &eig, grid)
}

fn correlation_from(ops: &FullSpaceOperators, eig: &Eigen, grid: &TimeGrid) -> Result<Vec<(f64, TimeSeries)>> {
    let n = ops.n;
    let k = ground_space(&eig.values);
    let mut members: Vec<(f64, Vec<C64>)> = if k == 1 {
        vec![(ops.sz.expectation(&eig.vectors[0])?.re, eig.vectors[0].clone())]
    } else {
        let sz_v: Vec<Vec<C64>> = eig.vectors[..k].iter().map(|v| ops.sz.apply(v)).collect::<Result<_>>()?;
        let mut block = vec![C64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in 0..k {
                block[i * k + j] = eig.vectors[i].iter().zip(&sz_v[j]).map(|(a, b)| a.conj() * b).sum();
            }
        }
        let inner = eigen::hermitian_dense(k, &block, true)?;
        inner
            .values
            .iter()
            .zip(&inner.vectors)
            .map(|(&m, c)| {
                let mut v = vec![C64::new(0.0, 0.0); eig.vectors[0].len()];
                for (ci, vi) in c.iter().zip(&eig.vectors[..k]) {
                    for (o, x) in v.iter_mut().zip(vi) {
                        *o += ci * x;
                    }
                }
                (m, v)
            })
            .collect()
    };
    members.sort_by(|a, b| a.0.total_cmp(&b.0));
    let e0 = eig.values[0];
    let norm = 4.0 / (n as f64 * n as f64);
    members
        .into_iter()
        .map(|(m, ground)| {
            let u = ops.sx.apply(&ground)?;
            let weights: Vec<(f64, f64)> = eig
                .vectors
                .iter()
                .zip(&eig.values)
                .map(|(v, &e)| (e - e0, v.iter().zip(&u).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()))
                .filter(|&(_, w)| w > 0.0)
                .collect();
            let values = (0..grid.len)
                .map(|j| {
                    let t = grid.at(j);
                    weights.iter().map(|&(de, w)| C64::from_polar(w * norm, -de * t)).sum()
                })
                .collect();
            Ok((m, TimeSeries::new(*grid, values, "f_full")?))
        })
        .collect()
}

/// Sector-versus-full deviations at one `(N, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub h: f64,
    pub ground_energy: f64,
    pub correlation: f64,
    pub localized_mx: f64,
}

impl OracleReport {
    pub fn worst(&self) -> f64 {
        self.ground_energy.max(self.correlation).max(self.localized_mx)
    }
}

/// Compares ground energy, `f_N(t)` on `grid` and the kicked-state `m_x`
/// (field `g` along x) between the Dicke sector and the product space.
pub fn sector_vs_full(n: usize, h: f64, g: f64, grid: &TimeGrid) -> Result<OracleReport> {
    check_n(n, MAX_CORRELATION_N)?;
    let params = LmgParams::isotropic(n, h)?;
    let sector = SpinSector::new(n)?;
    let sector_e0 = crate::model::isotropic_energies(&sector, h).into_iter().fold(f64::INFINITY, f64::min);
    let ops = full_space_operators(n)?;
    let eig = full_space_hamiltonian(&params, 0.0, 0.0)?.eigen(true)?;
    let full_e0 = eig.values[0];

    let sector_f = correlation_fn(&sector, h, grid)?;
    let full_f = correlation_from(&ops, &eig, grid)?;
    if sector_f.len() != full_f.len() {
        return Err(LmgError::NumericFailure(format!(
            "ground multiplicity differs: sector {}, full space {}",
            sector_f.len(),
            full_f.len()
        )));
    }
    let correlation = sector_f
        .iter()
        .zip(&full_f)
        .map(|(s, (m, f))| {
            let label = (s.m0.value() - m).abs();
            s.direct.max_abs_diff(f).max(label)
        })
        .fold(0.0, f64::max);

    let sector_mx = localize_ground_state(&params, g, 0.0)?.m_n;
    let full = full_space_ground(&params, g, 0.0)?;
    let full_mx = 2.0 * ops.sx.expectation(&full.vector)?.re / n as f64;

    Ok(OracleReport {
        n,
        h,
        ground_energy: (sector_e0 - full_e0).abs(),
        correlation,
        localized_mx: (sector_mx.abs() - full_mx.abs()).abs(),
    })
}

/// Eigenvalues of a dense Hermitian matrix by cyclic Jacobi rotations on its
/// real `2n x 2n` embedding `[[Re, -Im], [Im, Re]]`. Independent of the QL
/// kernel; intended for small test matrices.
pub fn jacobi_eigenvalues(n: usize, data: &[C64]) -> Result<Vec<f64>> {
    if data.len() != n * n {
        return Err(LmgError::dims(n * n, data.len()));
    }
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = data[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * m + j].powi(2)).sum();
        if off.sqrt() <= 1e-15 * scale {
            let mut d: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
            d.sort_by(f64::total_cmp);
            return Ok(d.into_iter().step_by(2).collect());
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LmgError::NumericFailure("Jacobi sweeps did not converge".into()))
}
