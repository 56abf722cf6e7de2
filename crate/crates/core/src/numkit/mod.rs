//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Every operator, state and superoperator is a [`CMatrix`]. Vectorization
//! is column stacking throughout, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

mod expm;
mod spectral;

pub use expm::mat_exp;
pub use spectral::{eigenvalues, herm_eig, null_space, singular_values, trace_norm, HermEig};

use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{bail, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value threshold used for rank and null-space decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Absolute max-entry tolerance for accepting user supplied Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub const fn c(re: f64, im: f64) -> C64 {
    Complex { re, im }
}

#[inline]
pub const fn re(x: f64) -> C64 {
    Complex { re: x, im: 0.0 }
}

pub const I: C64 = Complex { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { C64::new(0.0, 0.0) })
}

/// `|e_row⟩⟨e_col|` in dimension `n`.
pub fn matrix_unit(n: usize, row: usize, col: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(row, col)] = re(1.0);
    m
}

/// Largest entry modulus, the norm used for every residual in this crate.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn ensure_square(a: &CMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        bail!(Dimension, "{what} must be square, got {}x{}", a.nrows(), a.ncols());
    }
    Ok(a.nrows())
}

/// Kronecker product with `(A⊗B)[(i·p+k),(j·q+l)] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = b.shape();
    CMatrix::from_fn(a.nrows() * p, a.ncols() * q, |r, s| a[(r / p, s / q)] * b[(r % p, s % q)])
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a, It: IntoIterator<Item = &'a CMatrix>>(factors: It) -> CMatrix {
    factors.into_iter().fold(identity(1), |acc, f| kron(&acc, f))
}

/// Traces out the right factor of a `(d·m)×(d·m)` operator on `C^d ⊗ C^m`.
pub fn partial_trace_right(m: &CMatrix, d: usize, env: usize) -> Result<CMatrix> {
    if m.nrows() != d * env || m.ncols() != d * env {
        bail!(
            Dimension,
            "partial trace expects {}x{} for d={d}, m={env}, got {}x{}",
            d * env,
            d * env,
            m.nrows(),
            m.ncols()
        );
    }
    Ok(CMatrix::from_fn(d, d, |a, b| (0..env).map(|p| m[(a * env + p, b * env + p)]).sum()))
}

/// Matrix of `ρ ↦ A ρ B` acting on column-stacked `vec(ρ)`: `Bᵀ ⊗ A`.
pub fn sandwich_superop(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let d = ensure_square(a, "left factor")?;
    if b.shape() != (d, d) {
        bail!(Dimension, "sandwich factors differ: {}x{} vs {}x{}", d, d, b.nrows(), b.ncols());
    }
    Ok(kron(&b.transpose(), a))
}

/// Column-stacking vectorization.
pub fn vectorize(a: &CMatrix) -> CVector {
    // nalgebra storage is column-major, so the raw slice is already vec(A).
    CVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        bail!(Dimension, "vector of length {} is not a {d}x{d} matrix", v.len());
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Applies a superoperator to a matrix through the column-stacking convention.
pub fn apply_superop(s: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    let d = ensure_square(x, "operand")?;
    if s.shape() != (d * d, d * d) {
        bail!(Dimension, "superoperator is {}x{}, operand needs {}", s.nrows(), s.ncols(), d * d);
    }
    unvectorize(&(s * vectorize(x)), d)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Slope of `ln y` against `ln x`, the empirical convergence order.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (num_traits::Float::ln(*x), num_traits::Float::ln(*y)))
        .unzip();
    ls_slope(&lx, &ly)
}
