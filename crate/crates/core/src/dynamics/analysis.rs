use alloc::vec::Vec;

use super::{DensityMatrix, Superoperator};
use crate::error::{bail, Result};
use crate::numkit::{
    self, c, hermitian_part, herm_eig, identity, null_space, sandwich_superop, singular_values, trace,
    unvectorize, zeros, CMatrix, CVector, C64, RANK_TOL,
};

/// Kernel of a generator, reported as invariant states.
#[derive(Debug, Clone)]
pub struct Stationary {
    /// Dimension of the numerical null space of `L`.
    pub null_dim: usize,
    /// Linearly independent invariant density matrices spanning the kernel.
    pub states: Vec<DensityMatrix>,
}

impl Stationary {
    pub fn is_unique(&self) -> bool {
        self.null_dim == 1 && self.states.len() == 1
    }
}

fn positive_part(h: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    let d = h.nrows();
    let mut out = zeros(d, d);
    for (k, &v) in eig.values.iter().enumerate() {
        if v > 0.0 {
            let col = eig.vectors.column(k);
            out += (col * col.adjoint()).scale(v);
        }
    }
    Ok(out)
}

/// Invariant states of a Schrödinger-picture generator.
///
/// The kernel is closed under adjoints and under taking positive and
/// negative parts, so each kernel vector is split into Hermitian parts,
/// then into positive parts, which are normalized and kept when they add a
/// new direction.
pub fn stationary_states(generator: &Superoperator) -> Result<Stationary> {
    let d = generator.dim();
    let kernel = null_space(generator.matrix(), RANK_TOL);
    if kernel.is_empty() {
        bail!(Numerical, "generator has an empty numerical null space");
    }
    let mut candidates = Vec::new();
    for v in &kernel {
        let m = unvectorize(v, d)?;
        let herm = [hermitian_part(&m), hermitian_part(&m.map(|z| z * c(0.0, -1.0)))];
        for h in herm {
            let scale = numkit::max_abs(&h);
            if scale < 1e-8 {
                continue;
            }
            let h = h.unscale(scale);
            for part in [positive_part(&h)?, positive_part(&(-&h))?] {
                let tr = trace(&part).re;
                if tr > 1e-6 {
                    candidates.push(part.unscale(tr));
                }
            }
        }
    }

    // Greedy Gram–Schmidt in the Hilbert–Schmidt inner product.
    let mut accepted: Vec<CMatrix> = Vec::new();
    let mut ortho: Vec<CVector> = Vec::new();
    for cand in candidates {
        if accepted.len() == kernel.len() {
            break;
        }
        let mut r = numkit::vectorize(&cand);
        for q in &ortho {
            let proj: C64 = q.dotc(&r);
            r -= q.map(|z| z * proj);
        }
        let nrm = r.norm();
        if nrm > 1e-6 {
            ortho.push(r.unscale(nrm));
            accepted.push(cand);
        }
    }
    let states = accepted.into_iter().map(DensityMatrix::new).collect::<Result<Vec<_>>>()?;
    Ok(Stationary { null_dim: kernel.len(), states })
}

/// Eigenvalues of the generator.
pub fn spectrum(generator: &Superoperator) -> Result<Vec<C64>> {
    numkit::eigenvalues(generator.matrix())
}

/// `min −Re μ` over eigenvalues with `|μ| > 1e-9·‖L‖₂`; zero if there are none.
pub fn spectral_gap(generator: &Superoperator) -> Result<f64> {
    let norm = singular_values(generator.matrix()).first().copied().unwrap_or(0.0);
    let zero = 1e-9 * norm;
    let gap = spectrum(generator)?
        .into_iter()
        .filter(|mu| mu.norm() > zero)
        .map(|mu| -mu.re)
        .fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() { gap } else { 0.0 })
}

/// Dimension of `{X : [G, X] = 0 for every G}`.
pub fn commutant_dim(generators: &[CMatrix]) -> Result<usize> {
    let Some(first) = generators.first() else {
        bail!(Validation, "commutant of an empty family is undefined here");
    };
    let d = numkit::ensure_square(first, "generator")?;
    let id = identity(d);
    let mut stacked = zeros(generators.len() * d * d, d * d);
    for (k, g) in generators.iter().enumerate() {
        if g.shape() != (d, d) {
            bail!(Dimension, "generator {k} is {}x{}, expected {d}x{d}", g.nrows(), g.ncols());
        }
        let map = sandwich_superop(g, &id)? - sandwich_superop(&id, g)?;
        stacked.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&map);
    }
    Ok(null_space(&stacked, RANK_TOL).len())
}

/// `(dim {H, L_i, L_i*}', dim {L_i, L_i*}')`.
pub fn commutant_dims(h: &CMatrix, ls: &[CMatrix]) -> Result<(usize, usize)> {
    let mut family: Vec<CMatrix> = ls.iter().flat_map(|l| [l.clone(), l.adjoint()]).collect();
    let without = if family.is_empty() { h.nrows() * h.nrows() } else { commutant_dim(&family)? };
    family.push(h.clone());
    Ok((commutant_dim(&family)?, without))
}

/// Return-to-equilibrium criterion: adding `H` does not shrink the commutant
/// of `{L_i, L_i*}`.
pub fn frigerio_verri_check(h: &CMatrix, ls: &[CMatrix]) -> Result<bool> {
    if numkit::hermiticity_defect(h) > numkit::HERMITIAN_TOL {
        bail!(Validation, "Hamiltonian is not Hermitian");
    }
    let (with, without) = commutant_dims(h, ls)?;
    Ok(with == without)
}
