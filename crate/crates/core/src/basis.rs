//! Fourier basis algebra: the orthonormal basis on [0,1], the group of cyclic
//! starting-point shifts, and the action of shifts and rotations on coefficient
//! matrices.
//!
//! Basis ordering is interleaved per frequency m = 1..M/2: column 2(m-1) holds
//! the sine coefficient and column 2m-1 the cosine coefficient, so the transfer
//! matrix of a shift is block-diagonal with 2x2 rotation blocks.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix2, Matrix2xX};
use std::f64::consts::PI;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Size of the non-constant Fourier basis: frequencies m = 1..M/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    m: usize,
}

impl BasisSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidBasisSize(m));
        }
        Ok(BasisSpec { m })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn frequencies(&self) -> usize {
        self.m / 2
    }

    /// Evaluate the non-constant basis functions at t.
    ///
    /// Returns (psi_1(t), ..., psi_M(t)); the constant psi_0 = 1 is handled
    /// separately by the smoothing layer.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                domain: "[0,1]",
            });
        }
        let mut out = Vec::with_capacity(self.m);
        for freq in 1..=self.frequencies() {
            let arg = 2.0 * freq as f64 * PI * t;
            out.push(SQRT_2 * arg.sin());
            out.push(SQRT_2 * arg.cos());
        }
        Ok(out)
    }
}

/// A cyclic starting-point shift: gamma_delta(t) = mod(t - delta, 1).
///
/// delta is canonicalized to [0,1); delta = 1 is accepted and mapped to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReparamShift {
    delta: f64,
}

impl ReparamShift {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Domain {
                value: delta,
                domain: "[0,1]",
            });
        }
        Ok(ReparamShift {
            delta: if delta == 1.0 { 0.0 } else { delta },
        })
    }

    pub fn identity() -> Self {
        ReparamShift { delta: 0.0 }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// gamma_delta(t) = mod(t - delta, 1).
    pub fn apply(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                domain: "[0,1]",
            });
        }
        Ok((t - self.delta).rem_euclid(1.0))
    }

    /// Group composition: gamma_d1 o gamma_d2 = gamma_{mod(d1+d2,1)}.
    pub fn compose(&self, other: &ReparamShift) -> ReparamShift {
        ReparamShift {
            delta: (self.delta + other.delta).rem_euclid(1.0),
        }
    }

    /// Group inverse: gamma_{1-delta}.
    pub fn inverse(&self) -> ReparamShift {
        ReparamShift {
            delta: if self.delta == 0.0 { 0.0 } else { 1.0 - self.delta },
        }
    }
}

/// Block-diagonal orthogonal transfer matrix beta(delta) satisfying
/// psi(t) = beta(delta) psi(gamma_delta(t)).
///
/// Block m is the 2x2 rotation by angle -2 m pi delta. (The grid identity
/// above fixes the sign; rotating by +2 m pi delta fails it.)
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    delta: f64,
    m: usize,
}

impl TransferMatrix {
    pub fn new(shift: ReparamShift, spec: BasisSpec) -> Self {
        TransferMatrix {
            delta: shift.delta(),
            m: spec.size(),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// The 2x2 block for frequency m (1-based).
    pub fn block(&self, freq: usize) -> Matrix2<f64> {
        let phi = -2.0 * freq as f64 * PI * self.delta;
        Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos())
    }

    /// Materialize the full M x M matrix (mostly for tests and diagnostics).
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for freq in 1..=self.m / 2 {
            let b = self.block(freq);
            let i = 2 * (freq - 1);
            out.view_mut((i, i), (2, 2)).copy_from(&b);
        }
        out
    }

    /// Apply psi -> beta(delta) psi to a length-M vector in place.
    pub fn apply_left(&self, v: &mut [f64]) {
        assert_eq!(v.len(), self.m);
        for freq in 1..=self.m / 2 {
            let b = self.block(freq);
            let i = 2 * (freq - 1);
            let (s, c) = (v[i], v[i + 1]);
            v[i] = b[(0, 0)] * s + b[(0, 1)] * c;
            v[i + 1] = b[(1, 0)] * s + b[(1, 1)] * c;
        }
    }
}

/// 2 x M coefficient matrix of a centered curve in the basis psi_1..psi_M.
///
/// Row 0 holds the first coordinate function, row 1 the second. By
/// orthonormality the Frobenius norm equals the H-norm of the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix {
    entries: Matrix2xX<f64>,
}

impl CoefMatrix {
    pub fn new(entries: Matrix2xX<f64>) -> Result<Self> {
        BasisSpec::new(entries.ncols())?;
        Ok(CoefMatrix { entries })
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        CoefMatrix {
            entries: Matrix2xX::zeros(spec.size()),
        }
    }

    /// Build from flat slices of sin/cos coefficients per coordinate row.
    pub fn from_rows(row_x: &[f64], row_y: &[f64]) -> Result<Self> {
        if row_x.len() != row_y.len() {
            return Err(Error::DimensionMismatch {
                expected: row_x.len(),
                got: row_y.len(),
            });
        }
        BasisSpec::new(row_x.len())?;
        let mut entries = Matrix2xX::zeros(row_x.len());
        for j in 0..row_x.len() {
            entries[(0, j)] = row_x[j];
            entries[(1, j)] = row_y[j];
        }
        Ok(CoefMatrix { entries })
    }

    pub fn basis_spec(&self) -> BasisSpec {
        BasisSpec::new(self.entries.ncols()).expect("validated at construction")
    }

    pub fn size(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Matrix2xX<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    /// Frobenius norm = H-norm of the represented curve.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    /// H inner product with another coefficient matrix (entrywise sum).
    pub fn inner(&self, other: &CoefMatrix) -> Result<f64> {
        self.check_size(other)?;
        Ok(self.entries.dot(&other.entries))
    }

    /// alpha beta(delta): right multiplication by the transfer matrix.
    ///
    /// Note this expresses the same curve against the shifted basis (the Eq.-(9)
    /// operand); composing the curve itself with gamma_delta is `warp`.
    pub fn reparam(&self, shift: ReparamShift) -> CoefMatrix {
        let tm = TransferMatrix::new(shift, self.basis_spec());
        let mut out = self.entries.clone();
        for freq in 1..=self.size() / 2 {
            let b = tm.block(freq);
            let j = 2 * (freq - 1);
            for row in 0..2 {
                let (s, c) = (self.entries[(row, j)], self.entries[(row, j + 1)]);
                // row vector times 2x2 block
                out[(row, j)] = s * b[(0, 0)] + c * b[(1, 0)];
                out[(row, j + 1)] = s * b[(0, 1)] + c * b[(1, 1)];
            }
        }
        CoefMatrix { entries: out }
    }

    /// Coefficients of the curve composed with gamma_delta.
    ///
    /// Equals alpha beta(delta)^T = alpha beta(1-delta).
    pub fn warp(&self, shift: ReparamShift) -> CoefMatrix {
        self.reparam(shift.inverse())
    }

    /// O_theta alpha: left multiplication by the 2x2 rotation. With
    /// `reflect`, the second coordinate row is negated first (analyzing
    /// (X1, -X2) turns a reflection into a rotation).
    pub fn rotate(&self, theta: f64, reflect: bool) -> CoefMatrix {
        let (s, c) = theta.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let mut src = self.entries.clone();
        if reflect {
            for j in 0..src.ncols() {
                src[(1, j)] = -src[(1, j)];
            }
        }
        CoefMatrix { entries: rot * src }
    }

    pub fn scale(&self, factor: f64) -> CoefMatrix {
        CoefMatrix {
            entries: &self.entries * factor,
        }
    }

    pub fn check_size(&self, other: &CoefMatrix) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Ok(())
    }

    /// Flatten row-major into a 2M vector (row 0 first, then row 1).
    pub fn to_flat(&self) -> Vec<f64> {
        let m = self.size();
        let mut v = Vec::with_capacity(2 * m);
        for row in 0..2 {
            for j in 0..m {
                v.push(self.entries[(row, j)]);
            }
        }
        v
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: v.len() + 1,
                got: v.len(),
            });
        }
        let m = v.len() / 2;
        Self::from_rows(&v[..m], &v[m..])
    }
}

/// (Frobenius norm of a, H inner product of a and b).
pub fn coeff_norm_inner(a: &CoefMatrix, b: &CoefMatrix) -> Result<(f64, f64)> {
    let inner = a.inner(b)?;
    Ok((a.norm(), inner))
}
