use alloc::vec::Vec;
use nalgebra::linalg::{Schur, SymmetricEigen};

use super::{ensure_square, hermitian_part, hermiticity_defect, zeros, CMatrix, CVector, C64, HERMITIAN_TOL};
use crate::error::{bail, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

pub fn herm_eig(a: &CMatrix) -> Result<HermEig> {
    let n = ensure_square(a, "herm_eig input")?;
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_TOL {
        bail!(Validation, "matrix is not Hermitian (max |A - A*| = {defect:e})");
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermEig { values, vectors })
}

/// Singular values, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn trace_norm(a: &CMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// Orthonormal basis of `{v : ‖Av‖ ≤ tol·‖A‖·‖v‖}` by singular-value thresholding.
pub fn null_space(a: &CMatrix, tol: f64) -> Vec<CVector> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Vec::new();
    }
    // A thin SVD of a wide matrix drops right singular vectors; pad to square.
    let padded = if rows < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect()
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(a, "eigenvalue input")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = super::max_abs(a).max(f64::MIN_POSITIVE);
    let Some(schur) = Schur::try_new(a.clone(), f64::EPSILON, 10_000) else {
        bail!(Numerical, "Schur iteration did not converge for a {n}x{n} matrix");
    };
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            // Unreduced 2x2 block: solve its characteristic polynomial.
            let (p, q, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (p + s) * 0.5;
            let disc = ((p - s) * 0.5 * ((p - s) * 0.5) + q * r).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}
