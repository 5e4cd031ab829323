//! Hermitian eigensolver kernel.
//!
//! Every path ends in the same real symmetric tridiagonal problem solved by
//! implicit-shift QL:
//!
//! * band matrices (bandwidth >= 2) are reduced by Givens bulge chasing,
//! * dense matrices by Householder reflections (a real path is taken when the
//!   input has no imaginary part),
//! * the complex off-diagonal left over is removed with a diagonal unitary.

use std::ops::{AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;

use crate::error::{LmgError, Result};
use crate::spinspace::{BandedHermitianOperator, BandedOperator};

/// Eigenpairs in ascending order; `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

const MAX_QL_ITERATIONS: usize = 60;

/// Implicit-shift QL on a real symmetric tridiagonal matrix.
///
/// `diag` is overwritten with the (unsorted) eigenvalues. When `zt` is given
/// it holds row vectors that are rotated alongside, so starting from the
/// identity `zt[k]` ends up as the k-th eigenvector.
pub fn tridiagonal_ql(diag: &mut [f64], off: &[f64], mut zt: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    // absolute floor: near-zero eigenvalues cannot deflate on the relative test alone
    let floor = f64::EPSILON * diag.iter().chain(&e).fold(0.0f64, |a, x| a.max(x.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(LmgError::NumericFailure(format!("QL iteration did not converge for eigenvalue {l}")));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Ascending order with index tie-break.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Diagonal phases turning a Hermitian tridiagonal with complex
/// sub-diagonal `off` into a real one with non-negative sub-diagonal.
fn remove_phases(off: &[C64]) -> (Vec<f64>, Vec<C64>) {
    let mut phases = Vec::with_capacity(off.len() + 1);
    phases.push(C64::new(1.0, 0.0));
    let mut real = Vec::with_capacity(off.len());
    for &o in off {
        let last = *phases.last().unwrap();
        let a = o.norm();
        real.push(a);
        phases.push(if a == 0.0 { last } else { last * (o / a) });
    }
    (real, phases)
}

/// Solves a Hermitian tridiagonal given by its real diagonal and complex
/// sub-diagonal, with eigenvectors expressed through `basis` (columns; the
/// identity when `None`).
fn solve_tridiagonal(diag: Vec<f64>, off: &[C64], basis: Option<&[Vec<C64>]>, want_vectors: bool) -> Result<Eigen> {
    let n = diag.len();
    let (real_off, phases) = remove_phases(off);
    let mut d = diag;
    let mut zt: Vec<Vec<f64>> = if want_vectors {
        (0..n).map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        }).collect()
    } else {
        Vec::new()
    };
    tridiagonal_ql(&mut d, &real_off, want_vectors.then_some(zt.as_mut_slice()))?;
    let order = ascending_order(&d);
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    if !want_vectors {
        return Ok(Eigen { values, vectors: Vec::new() });
    }
    let vectors = order
        .iter()
        .map(|&k| {
            let z = &zt[k];
            match basis {
                None => z.iter().zip(&phases).map(|(&zi, &p)| p * zi).collect(),
                // basis[i] is column i of the accumulated unitary
                Some(q) => {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    for i in 0..n {
                        let coef = phases[i] * z[i];
                        if coef == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for (vr, qr) in v.iter_mut().zip(&q[i]) {
                            *vr += qr * coef;
                        }
                    }
                    v
                }
            }
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Complex Givens rotation `[c s; -conj(s) c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let rho = ax.hypot(y.norm());
    if rho == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    (ax / rho, (x / ax) * y.conj() / rho)
}

/// `A <- G A G^H` for `G` acting on rows/cols `(p, p+1)`, touching only the band.
fn rotate_band(a: &mut BandedOperator, p: usize, c: f64, s: C64) {
    let n = a.dim();
    let bw = a.bandwidth();
    let q = p + 1;
    let lo = p.saturating_sub(bw);
    let hi = (q + bw).min(n - 1);
    let in_band = |i: usize, j: usize| i.abs_diff(j) <= bw;
    for j in lo..=hi {
        let (x, y) = (a.get(p, j), a.get(q, j));
        let nx = x * c + s * y;
        let ny = -s.conj() * x + y * c;
        if in_band(p, j) {
            a.set(p, j, nx);
        }
        if in_band(q, j) {
            a.set(q, j, ny);
        }
    }
    for i in lo..=hi {
        let (x, y) = (a.get(i, p), a.get(i, q));
        let nx = x * c + s.conj() * y;
        let ny = -s * x + y * c;
        if in_band(i, p) {
            a.set(i, p, nx);
        }
        if in_band(i, q) {
            a.set(i, q, ny);
        }
    }
}

/// `Q <- Q G^H` on columns `(p, p+1)`; `q[i]` is column i.
fn rotate_columns(q: &mut [Vec<C64>], p: usize, c: f64, s: C64) {
    let (lo, hi) = q.split_at_mut(p + 1);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    let sc = s.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a * c + sc * b;
        *y = -s * a + b * c;
    }
}

/// Givens bulge-chasing reduction of a Hermitian band matrix to tridiagonal
/// form. Returns the diagonal, the complex sub-diagonal and, on request, the
/// accumulated unitary as columns.
fn band_to_tridiagonal(op: &BandedOperator, want_q: bool) -> (Vec<f64>, Vec<C64>, Option<Vec<Vec<C64>>>) {
    let n = op.dim();
    let b = op.bandwidth();
    let mut a = BandedOperator::zeros(n, b + 1);
    op.for_each_entry(|i, j, v| a.set(i, j, v));
    let mut q: Option<Vec<Vec<C64>>> = want_q.then(|| {
        (0..n).map(|i| {
            let mut col = vec![C64::new(0.0, 0.0); n];
            col[i] = C64::new(1.0, 0.0);
            col
        }).collect()
    });
    let zero = C64::new(0.0, 0.0);
    for j in 0..n.saturating_sub(2) {
        for k in (2..=b).rev() {
            let i = j + k;
            if i >= n || a.get(i, j) == zero {
                continue;
            }
            let (c, s) = givens(a.get(i - 1, j), a.get(i, j));
            rotate_band(&mut a, i - 1, c, s);
            a.set(i, j, zero);
            a.set(j, i, zero);
            if let Some(q) = q.as_mut() {
                rotate_columns(q, i - 1, c, s);
            }
            // chase the bulge created at (r + b, r - 1)
            let mut r = i;
            while r + b < n {
                let (bi, bj) = (r + b, r - 1);
                if a.get(bi, bj) == zero {
                    break;
                }
                let (c, s) = givens(a.get(bi - 1, bj), a.get(bi, bj));
                rotate_band(&mut a, bi - 1, c, s);
                a.set(bi, bj, zero);
                a.set(bj, bi, zero);
                if let Some(q) = q.as_mut() {
                    rotate_columns(q, bi - 1, c, s);
                }
                r = bi;
            }
        }
    }
    let diag = (0..n).map(|i| a.get(i, i).re).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a.get(i + 1, i)).collect();
    (diag, off, q)
}

/// Full eigendecomposition of a Hermitian band matrix.
pub fn hermitian_banded(op: &BandedHermitianOperator, want_vectors: bool) -> Result<Eigen> {
    let op = op.as_banded();
    let n = op.dim();
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: Vec::new() });
    }
    match op.bandwidth() {
        0 => {
            let d: Vec<f64> = (0..n).map(|i| op.get(i, i).re).collect();
            let order = ascending_order(&d);
            let values = order.iter().map(|&k| d[k]).collect();
            let vectors = if want_vectors {
                order.iter().map(|&k| {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    v[k] = C64::new(1.0, 0.0);
                    v
                }).collect()
            } else {
                Vec::new()
            };
            Ok(Eigen { values, vectors })
        }
        1 => {
            let d = (0..n).map(|i| op.get(i, i).re).collect();
            let off: Vec<C64> = (0..n - 1).map(|i| op.get(i + 1, i)).collect();
            solve_tridiagonal(d, &off, None, want_vectors)
        }
        _ => {
            let (d, off, q) = band_to_tridiagonal(op, want_vectors);
            solve_tridiagonal(d, &off, q.as_deref(), want_vectors)
        }
    }
}

/// Field operations shared by the real and complex Householder paths.
pub trait Scalar:
    Copy + Send + Sync + Mul<Output = Self> + std::ops::Add<Output = Self> + Sub<Output = Self> + SubAssign + AddAssign + Neg<Output = Self> + std::iter::Sum
{
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, x: f64) -> Self;
    fn to_c64(self) -> C64;
}

impl Scalar for f64 {
    fn zero() -> Self { 0.0 }
    fn from_re(x: f64) -> Self { x }
    fn conj(self) -> Self { self }
    fn norm_sqr(self) -> f64 { self * self }
    fn re(self) -> f64 { self }
    fn scale(self, x: f64) -> Self { self * x }
    fn to_c64(self) -> C64 { C64::new(self, 0.0) }
}

impl Scalar for C64 {
    fn zero() -> Self { C64::new(0.0, 0.0) }
    fn from_re(x: f64) -> Self { C64::new(x, 0.0) }
    fn conj(self) -> Self { C64::conj(&self) }
    fn norm_sqr(self) -> f64 { C64::norm_sqr(&self) }
    fn re(self) -> f64 { self.re }
    fn scale(self, x: f64) -> Self { self * x }
    fn to_c64(self) -> C64 { self }
}

/// Householder tridiagonalization of a dense Hermitian matrix (row-major).
/// Returns the diagonal, the sub-diagonal and the accumulated unitary as
/// row-major data.
fn householder_tridiagonal<T: Scalar>(n: usize, mut a: Vec<T>, want_q: bool) -> (Vec<f64>, Vec<T>, Vec<T>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut q = Vec::new();
    if want_q {
        q = vec![T::zero(); n * n];
        for i in 0..n {
            q[i * n + i] = T::from_re(1.0);
        }
    }
    let mut u = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        diag[k] = a[k * n + k].re();
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            off[k] = x0;
            continue;
        }
        let alpha = (x0.norm_sqr() + tail).sqrt();
        let ax0 = x0.norm_sqr().sqrt();
        let phase = if ax0 == 0.0 { T::from_re(1.0) } else { x0.scale(1.0 / ax0) };
        let beta = -phase.scale(alpha);
        // v = x - beta e1, normalized
        let uk = &mut u[..m];
        for (t, i) in (k + 1..n).enumerate() {
            uk[t] = a[i * n + k];
        }
        uk[0] -= beta;
        let vn = uk.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        uk.iter_mut().for_each(|v| *v = v.scale(1.0 / vn));
        off[k] = beta;
        // p = A_sub u
        let pk = &mut p[..m];
        for (r, pr) in pk.iter_mut().enumerate() {
            let row = &a[(k + 1 + r) * n + k + 1..(k + 2 + r) * n];
            *pr = row.iter().zip(uk.iter()).map(|(&x, &y)| x * y).sum();
        }
        let kk: f64 = uk.iter().zip(pk.iter()).map(|(&x, &y)| x.conj() * y).sum::<T>().re();
        for (pr, &ur) in pk.iter_mut().zip(uk.iter()) {
            *pr -= ur.scale(kk);
        }
        // A_sub -= 2 (u w^H + w u^H)
        for r in 0..m {
            let (ur2, wr2) = (uk[r].scale(2.0), pk[r].scale(2.0));
            let row = &mut a[(k + 1 + r) * n + k + 1..(k + 2 + r) * n];
            for (c, x) in row.iter_mut().enumerate() {
                *x -= ur2 * pk[c].conj() + wr2 * uk[c].conj();
            }
        }
        if want_q {
            for r in 0..n {
                let row = &mut q[r * n + k + 1..(r + 1) * n];
                let s: T = row.iter().zip(uk.iter()).map(|(&x, &y)| x * y).sum::<T>().scale(2.0);
                for (x, &y) in row.iter_mut().zip(uk.iter()) {
                    *x -= s * y.conj();
                }
            }
        }
    }
    if n > 0 {
        diag[n - 1] = a[(n - 1) * n + n - 1].re();
    }
    (diag, off, q)
}

fn dense_via<T: Scalar>(n: usize, a: Vec<T>, want_vectors: bool) -> Result<Eigen> {
    let (diag, off, q) = householder_tridiagonal(n, a, want_vectors);
    let off_c: Vec<C64> = off.iter().map(|v| v.to_c64()).collect();
    if !want_vectors {
        return solve_tridiagonal(diag, &off_c, None, false);
    }
    let (real_off, phases) = remove_phases(&off_c);
    let mut d = diag;
    let mut zt: Vec<Vec<f64>> = (0..n).map(|i| {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        row
    }).collect();
    tridiagonal_ql(&mut d, &real_off, Some(&mut zt))?;
    let order = ascending_order(&d);
    let values = order.iter().map(|&k| d[k]).collect();
    // v_k[r] = sum_i Q[r][i] phase_i z_k[i]
    let vectors = order
        .iter()
        .map(|&k| {
            let coef: Vec<C64> = zt[k].iter().zip(&phases).map(|(&z, &p)| p * z).collect();
            (0..n)
                .map(|r| q[r * n..(r + 1) * n].iter().zip(&coef).map(|(&x, &c)| x.to_c64() * c).sum())
                .collect()
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Tolerance for accepting a dense matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Full eigendecomposition of a dense Hermitian matrix given row-major.
pub fn hermitian_dense(n: usize, data: &[C64], want_vectors: bool) -> Result<Eigen> {
    if data.len() != n * n {
        return Err(LmgError::dims(n * n, data.len()));
    }
    let scale = data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..n {
        for j in i..n {
            if (data[i * n + j] - data[j * n + i].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(LmgError::invalid(format!("matrix is not Hermitian at ({i}, {j})")));
            }
        }
    }
    if data.iter().all(|v| v.im == 0.0) {
        dense_via(n, data.iter().map(|v| v.re).collect::<Vec<f64>>(), want_vectors)
    } else {
        dense_via(n, data.to_vec(), want_vectors)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_band(n: usize, b: usize, seed: u64) -> BandedHermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BandedHermitianOperator::from_upper(n, b, |i, j| {
            if i == j {
                C64::new(rng.gen_range(-2.0..2.0), 0.0)
            } else {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
    }

    fn check_pairs(op: &BandedOperator, eig: &Eigen, tol: f64) {
        let n = op.dim();
        let scale = op.max_abs().max(1.0);
        for (k, v) in eig.vectors.iter().enumerate() {
            let hv = op.apply_slice(v).unwrap();
            let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * eig.values[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(res <= tol * scale * n as f64, "residual {res} for k={k}");
            for (l, w) in eig.vectors.iter().enumerate().take(k + 1) {
                let ip: C64 = w.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-11, "<{l}|{k}> = {ip}");
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn banded_paths_give_orthonormal_eigenpairs() {
        for (n, b) in [(1, 0), (2, 1), (7, 0), (30, 1), (31, 2), (40, 3), (5, 2)] {
            let op = random_band(n, b, 11 + n as u64);
            let eig = hermitian_banded(&op, true).unwrap();
            check_pairs(&op, &eig, 1e-13);
            let vals = hermitian_banded(&op, false).unwrap().values;
            for (a, b) in vals.iter().zip(&eig.values) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_complex_and_real_paths() {
        for (n, b, seed) in [(12, 11, 3), (25, 2, 4)] {
            let op = random_band(n, b, seed);
            let dense = op.to_dense();
            let eig = hermitian_dense(n, &dense, true).unwrap();
            check_pairs(&op, &eig, 1e-13);
            let band = hermitian_banded(&op, false).unwrap();
            for (a, b) in eig.values.iter().zip(&band.values) {
                assert!((a - b).abs() < 1e-11);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20;
        let real = BandedHermitianOperator::from_upper(n, n - 1, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let eig = hermitian_dense(n, &real.to_dense(), true).unwrap();
        check_pairs(&real, &eig, 1e-13);
    }

    #[test]
    fn dense_rejects_non_hermitian() {
        let m = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(hermitian_dense(2, &m, false), Err(LmgError::InvalidArgument(_))));
        assert!(hermitian_dense(3, &m, false).is_err());
    }

    #[test]
    fn degenerate_spectrum_stays_orthonormal() {
        let n = 16;
        let op = BandedHermitianOperator::from_upper(n, 1, |i, j| {
            if i == j { C64::new(1.0, 0.0) } else if (i / 2) * 2 == i { C64::new(0.0, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let eig = hermitian_banded(&op, true).unwrap();
        check_pairs(&op, &eig, 1e-14);
        assert!(eig.values.iter().all(|&v| v == 1.0));
    }
}
