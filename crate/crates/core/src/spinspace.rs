//! The maximal-spin (`S = N/2`) Dicke sector and its collective operators.
//!
//! Basis index `m` runs `0..=N` with magnetization `M(m) = S - m`, so index 0
//! is always the fully polarized `M = +S` state. Magnetizations are kept as
//! doubled integers ([`HalfInt`]) so parity logic for odd `N` stays exact.

use std::fmt;
use std::ops::Deref;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{LmgError, Result};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The `S = N/2` sector of `N` spin-1/2 particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinSector {
    n: usize,
}

impl SpinSector {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LmgError::invalid("spin count N must be at least 1"));
        }
        Ok(SpinSector { n })
    }

    /// Accepts a real spin count, rejecting non-integers.
    pub fn from_real(n: f64) -> Result<Self> {
        if !n.is_finite() || n.fract() != 0.0 || n < 1.0 {
            return Err(LmgError::invalid(format!("spin count must be a positive integer, got {n}")));
        }
        Self::new(n as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn spin(&self) -> HalfInt {
        HalfInt(self.n as i64)
    }

    /// `S(S+1)`.
    pub fn casimir(&self) -> f64 {
        let t = self.n as f64;
        t * (t + 2.0) / 4.0
    }

    pub fn magnetization(&self, m: usize) -> HalfInt {
        debug_assert!(m <= self.n);
        HalfInt(self.n as i64 - 2 * m as i64)
    }

    pub fn m_value(&self, m: usize) -> f64 {
        self.magnetization(m).value()
    }

    pub fn magnetizations(&self) -> Vec<f64> {
        (0..self.dim()).map(|m| self.m_value(m)).collect()
    }

    /// Basis index of magnetization `mag`, if it lies in the sector.
    pub fn index_of(&self, mag: HalfInt) -> Option<usize> {
        let d = self.n as i64 - mag.0;
        if d < 0 || d % 2 != 0 || d / 2 > self.n as i64 {
            None
        } else {
            Some((d / 2) as usize)
        }
    }

    /// `<M+1|S+|M>` for the state at index `m`; zero at `M = S`.
    pub fn raising_element(&self, m: usize) -> f64 {
        let ts = self.n as i64;
        let tm = self.magnetization(m).0;
        // 4 [S(S+1) - M(M+1)] in doubled integers
        let num = ts * (ts + 2) - tm * (tm + 2);
        (num as f64).sqrt() / 2.0
    }
}

/// Complex square band matrix with equal lower and upper bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedOperator {
    dim: usize,
    bandwidth: usize,
    data: Vec<C64>,
}

impl BandedOperator {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        BandedOperator { dim, bandwidth, data: vec![C64::new(0.0, 0.0); dim * (2 * bandwidth + 1)] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim, 0);
        for i in 0..dim {
            op.set(i, i, C64::new(1.0, 0.0));
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let b = self.bandwidth;
        if i >= self.dim || j >= self.dim || i.abs_diff(j) > b {
            return None;
        }
        Some(i * (2 * b + 1) + (j + b - i))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |k| self.data[k])
    }

    /// Panics when `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band {}", self.bandwidth));
        self.data[k] = v;
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(LmgError::dims(self.dim, len));
        }
        Ok(())
    }

    /// Banded matrix-vector product.
    pub fn apply_slice(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(x.len())?;
        let b = self.bandwidth;
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(self.dim - 1);
            let row = &self.data[i * (2 * b + 1)..(i + 1) * (2 * b + 1)];
            let mut acc = C64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += row[j + b - i] * x[j];
            }
            *yi = acc;
        }
        Ok(y)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<Vec<C64>> {
        psi.require_basis(Basis::Sz)?;
        self.apply_slice(psi.amplitudes())
    }

    /// `<x|A|x>` without normalization.
    pub fn quadratic_form(&self, x: &[C64]) -> Result<C64> {
        let ax = self.apply_slice(x)?;
        Ok(x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        psi.require_basis(Basis::Sz)?;
        self.quadratic_form(psi.amplitudes())
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim, self.bandwidth);
        self.for_each_entry(|i, j, v| out.set(j, i, v.conj()));
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        BandedOperator { dim: self.dim, bandwidth: self.bandwidth, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Result<Self> {
        self.check_dim(other.dim)?;
        let b = self.bandwidth.max(other.bandwidth);
        let mut out = Self::zeros(self.dim, b);
        self.for_each_entry(|i, j, v| out.set(i, j, v));
        other.for_each_entry(|i, j, v| {
            let cur = out.get(i, j);
            out.set(i, j, cur + s * v);
        });
        Ok(out)
    }

    /// Band matrix product; the result bandwidth is the sum of the operands'.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let b = (self.bandwidth + other.bandwidth).min(self.dim.saturating_sub(1));
        let mut out = Self::zeros(self.dim, b);
        for i in 0..self.dim {
            let klo = i.saturating_sub(self.bandwidth);
            let khi = (i + self.bandwidth).min(self.dim - 1);
            for k in klo..=khi {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let jlo = k.saturating_sub(other.bandwidth);
                let jhi = (k + other.bandwidth).min(self.dim - 1);
                for j in jlo..=jhi {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.add_scaled(&other.matmul(self)?, C64::new(-1.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Calls `f(i, j, value)` for every stored in-range entry.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, C64)) {
        let b = self.bandwidth;
        for i in 0..self.dim {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(self.dim - 1);
            for j in lo..=hi {
                f(i, j, self.data[i * (2 * b + 1) + (j + b - i)]);
            }
        }
    }

    /// Exact Hermiticity of the stored entries.
    pub fn is_hermitian(&self) -> bool {
        let mut ok = true;
        self.for_each_entry(|i, j, v| {
            if j >= i && self.get(j, i) != v.conj() {
                ok = false;
            }
        });
        ok
    }

    /// Smallest bandwidth that holds every nonzero entry.
    pub fn effective_bandwidth(&self) -> usize {
        let mut b = 0;
        self.for_each_entry(|i, j, v| {
            if v != C64::new(0.0, 0.0) {
                b = b.max(i.abs_diff(j));
            }
        });
        b
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        self.for_each_entry(|i, j, v| out[i * n + j] = v);
        out
    }

    /// Copy with the bandwidth shrunk to [`effective_bandwidth`](Self::effective_bandwidth).
    pub fn compact(&self) -> Self {
        let b = self.effective_bandwidth();
        let mut out = Self::zeros(self.dim, b);
        self.for_each_entry(|i, j, v| {
            if i.abs_diff(j) <= b {
                out.set(i, j, v);
            }
        });
        out
    }
}

/// A [`BandedOperator`] whose stored entries satisfy `A[i][j] == conj(A[j][i])` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitianOperator(BandedOperator);

impl BandedHermitianOperator {
    pub fn new(op: BandedOperator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(LmgError::invalid("operator is not Hermitian as stored"));
        }
        Ok(BandedHermitianOperator(op))
    }

    /// Builds from the diagonal and upper band; the lower band is mirrored.
    pub fn from_upper(dim: usize, bandwidth: usize, mut upper: impl FnMut(usize, usize) -> C64) -> Self {
        let mut op = BandedOperator::zeros(dim, bandwidth);
        for i in 0..dim {
            op.set(i, i, C64::new(upper(i, i).re, 0.0));
            for j in (i + 1)..(i + bandwidth + 1).min(dim) {
                let v = upper(i, j);
                op.set(i, j, v);
                op.set(j, i, v.conj());
            }
        }
        BandedHermitianOperator(op)
    }

    pub fn as_banded(&self) -> &BandedOperator {
        &self.0
    }

    pub fn into_banded(self) -> BandedOperator {
        self.0
    }

    /// Real part of `<psi|A|psi>`; the imaginary part is rounding noise.
    pub fn expectation_re(&self, psi: &StateVector) -> Result<f64> {
        Ok(self.0.expectation(psi)?.re)
    }
}

impl Deref for BandedHermitianOperator {
    type Target = BandedOperator;
    fn deref(&self) -> &BandedOperator {
        &self.0
    }
}

/// The five collective spin operators of a sector.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub sx: BandedHermitianOperator,
    pub sy: BandedHermitianOperator,
    pub sz: BandedHermitianOperator,
    pub splus: BandedOperator,
    pub sminus: BandedOperator,
}

impl CollectiveOperators {
    /// `cos(phi) Sx + sin(phi) Sy`.
    pub fn in_plane(&self, phi: f64) -> BandedHermitianOperator {
        let (s, c) = phi.sin_cos();
        let dim = self.sx.dim();
        BandedHermitianOperator::from_upper(dim, 1, |i, j| {
            if i == j {
                C64::new(0.0, 0.0)
            } else {
                self.sx.get(i, j) * c + self.sy.get(i, j) * s
            }
        })
    }
}

pub fn collective_operators(sector: &SpinSector) -> CollectiveOperators {
    let dim = sector.dim();
    let zero = C64::new(0.0, 0.0);
    let mut splus = BandedOperator::zeros(dim, 1);
    for m in 1..dim {
        splus.set(m - 1, m, C64::new(sector.raising_element(m), 0.0));
    }
    let sminus = splus.adjoint();
    let ladder = |i: usize, j: usize| if j == i + 1 { splus.get(i, j).re } else { 0.0 };
    let sx = BandedHermitianOperator::from_upper(dim, 1, |i, j| {
        if i == j { zero } else { C64::new(ladder(i, j) / 2.0, 0.0) }
    });
    // (S+ - S-)/(2i): upper entries -i s/2
    let sy = BandedHermitianOperator::from_upper(dim, 1, |i, j| {
        if i == j { zero } else { C64::new(0.0, -ladder(i, j) / 2.0) }
    });
    let sz = BandedHermitianOperator::from_upper(dim, 0, |i, _| C64::new(sector.m_value(i), 0.0));
    CollectiveOperators { sx, sy, sz, splus, sminus }
}

/// The spin-flip parity `exp(i pi (Sz - S))`, diagonal with entries `(-1)^m`.
pub fn parity_operator(sector: &SpinSector) -> BandedHermitianOperator {
    BandedHermitianOperator::from_upper(sector.dim(), 0, |i, _| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
}

/// Which basis a [`StateVector`]'s amplitudes refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    /// Sz eigenbasis in descending-M order.
    Sz,
    /// Eigenbasis of some Hamiltonian in ascending-energy order.
    Energy,
}

pub const NORM_TOL: f64 = 1e-12;

/// Unit-norm complex amplitudes tagged with their basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: Vec<C64>,
}

impl StateVector {
    /// Rejects vectors whose norm is not 1 within [`NORM_TOL`].
    pub fn new(basis: Basis, amps: Vec<C64>) -> Result<Self> {
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if amps.is_empty() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(LmgError::invalid(format!("state norm^2 = {n2}, expected 1")));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn normalized(basis: Basis, mut amps: Vec<C64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(LmgError::invalid("cannot normalize a zero or non-finite vector"));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(StateVector { basis, amps })
    }

    pub fn basis_vector(basis: Basis, dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { basis, amps }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(LmgError::dims(self.dim(), other.dim()));
        }
        if self.basis != other.basis {
            return Err(LmgError::invalid("inner product across different bases"));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub(crate) fn require_basis(&self, basis: Basis) -> Result<()> {
        if self.basis != basis {
            return Err(LmgError::invalid(format!("expected a {basis:?}-basis state, got {:?}", self.basis)));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(basis: Basis, amps: Vec<C64>) -> Self {
        StateVector { basis, amps }
    }
}
