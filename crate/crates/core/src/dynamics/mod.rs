//! Reduced system dynamics: the one-step channel of the repeated
//! interaction, the limiting Lindblad generators, and their long-time
//! behaviour.
//!
//! Superoperators act on column-stacked matrices (see [`crate::numkit`]).

mod analysis;
mod studies;

pub use analysis::{
    commutant_dim, commutant_dims, frigerio_verri_check, spectral_gap, spectrum, stationary_states, Stationary,
};
pub use studies::{
    convergence_study, iterate_map, return_to_equilibrium, ConvergenceRow, ConvergenceStudy, RelaxationStudy,
    TAIL_WINDOW,
};

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{bail, Result};
use crate::model::{interaction_unitary, ModelSpec};
use crate::numkit::{
    self, c, hermitian_part, hermiticity_defect, herm_eig, identity, mat_exp, sandwich_superop, trace, vectorize,
    zeros, CMatrix,
};

/// Tolerance for accepting a matrix as a density matrix.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Hermitian, eigenvalues ≥ −1e-10 and unit trace, all to [`STATE_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        numkit::ensure_square(&m, "density matrix")?;
        if !numkit::is_finite(&m) {
            bail!(Validation, "density matrix has non-finite entries");
        }
        let defect = hermiticity_defect(&m);
        if defect > STATE_TOL {
            bail!(Validation, "density matrix is not Hermitian (defect {defect:e})");
        }
        let tr = trace(&m);
        if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
            bail!(Validation, "density matrix has trace {tr}, expected 1");
        }
        let min = herm_eig(&m)?.values[0];
        if min < -STATE_TOL {
            bail!(Validation, "density matrix has negative eigenvalue {min:e}");
        }
        Ok(Self(m))
    }

    /// `|e_k⟩⟨e_k|` in dimension `d`.
    pub fn basis_state(d: usize, k: usize) -> Self {
        Self(numkit::matrix_unit(d, k, k))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * numkit::trace_norm(&(a - b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperKind {
    Generator,
    Channel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: CMatrix,
    kind: SuperKind,
    dim: usize,
}

impl Superoperator {
    pub fn new(matrix: CMatrix, kind: SuperKind) -> Result<Self> {
        let n = numkit::ensure_square(&matrix, "superoperator")?;
        let dim = Float::sqrt(n as f64).round() as usize;
        if dim * dim != n {
            bail!(Dimension, "superoperator size {n} is not a square dimension");
        }
        Ok(Self { matrix, kind, dim })
    }

    pub fn generator(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, SuperKind::Generator)
    }

    pub fn kind(&self) -> SuperKind {
        self.kind
    }

    /// Dimension `d` of the operators acted on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        numkit::apply_superop(&self.matrix, x)
    }

    /// Dual map under `tr(S(X)·ρ) = tr(X·S_*(ρ))`: `P Sᵀ P` with `P` the
    /// vectorized transpose.
    pub fn predual(&self) -> Self {
        let d = self.dim;
        let n = d * d;
        let p = |k: usize| (k % d) * d + k / d;
        let t = self.matrix.transpose();
        let matrix = CMatrix::from_fn(n, n, |r, s| t[(p(r), p(s))]);
        Self { matrix, kind: self.kind, dim: d }
    }

    /// Trace-preservation defect: `vec(I)ᵀ·S` against `vec(I)ᵀ` for a channel,
    /// against zero for a generator.
    pub fn trace_defect(&self) -> f64 {
        let vi = vectorize(&identity(self.dim));
        let row = self.matrix.tr_mul(&vi);
        let target = match self.kind {
            SuperKind::Channel => vi,
            SuperKind::Generator => vi.map(|_| c(0.0, 0.0)),
        };
        (row - target).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: self.matrix.scale(factor), kind: self.kind, dim: self.dim }
    }
}

/// Kraus operators `K_{p,q} = √β_q ⟨e_p|U(τ)|e_q⟩` of the one-step reduced map.
pub fn kraus_operators(model: &ModelSpec, tau: f64) -> Result<Vec<CMatrix>> {
    let u = interaction_unitary(model, tau)?;
    let d = model.system_dim();
    let m = model.bath_dim();
    let mut out = Vec::with_capacity(m * m);
    for p in 0..m {
        for (q, w) in model.weights().iter().enumerate() {
            let block = CMatrix::from_fn(d, d, |s, t| u[(s * m + p, t * m + q)]);
            out.push(block.scale(Float::sqrt(*w)));
        }
    }
    Ok(out)
}

/// `Φ_τ(ρ) = tr_bath(U (ρ ⊗ ρ_β) U*)` as a sum of Kraus sandwiches.
pub fn interaction_map(model: &ModelSpec, tau: f64) -> Result<Superoperator> {
    let d = model.system_dim();
    let mut s = zeros(d * d, d * d);
    for k in kraus_operators(model, tau)? {
        s += sandwich_superop(&k, &k.adjoint())?;
    }
    Superoperator::new(s, SuperKind::Channel)
}

fn commutator_superop(h: &CMatrix, sign: f64) -> Result<CMatrix> {
    let d = h.nrows();
    let id = identity(d);
    let comm = sandwich_superop(h, &id)? - sandwich_superop(&id, h)?;
    Ok(comm.map(|z| z * c(0.0, sign)))
}

// X ↦ −½ rate (L*L X + X L*L − 2 L* X L)
fn heisenberg_dissipator(l: &CMatrix, rate: f64) -> Result<CMatrix> {
    let id = identity(l.nrows());
    let ld = l.adjoint();
    let ll = &ld * l;
    let s = sandwich_superop(&ll, &id)? + sandwich_superop(&id, &ll)? - sandwich_superop(&ld, l)?.scale(2.0);
    Ok(s.scale(-0.5 * rate))
}

// ρ ↦ −½ rate (L*L ρ + ρ L*L − 2 L ρ L*)
fn schrodinger_dissipator(l: &CMatrix, rate: f64) -> Result<CMatrix> {
    let id = identity(l.nrows());
    let ld = l.adjoint();
    let ll = &ld * l;
    let s = sandwich_superop(&ll, &id)? + sandwich_superop(&id, &ll)? - sandwich_superop(l, &ld)?.scale(2.0);
    Ok(s.scale(-0.5 * rate))
}

/// Heisenberg-picture limit generator of the repeated interaction:
/// `i[H_S,X] + Σ β_0 D*(V_i) + β_i D*(V_i*)`.
pub fn lindblad_heisenberg(model: &ModelSpec) -> Result<Superoperator> {
    let beta = model.weights();
    let mut s = commutator_superop(model.hamiltonian(), 1.0)?;
    for (n, v) in model.couplings().iter().enumerate() {
        s += heisenberg_dissipator(v, beta[0])?;
        s += heisenberg_dissipator(&v.adjoint(), beta[n + 1])?;
    }
    Superoperator::generator(s)
}

/// Schrödinger-picture generator, the predual of [`lindblad_heisenberg`],
/// built directly from its own sandwiches.
pub fn lindblad_schrodinger(model: &ModelSpec) -> Result<Superoperator> {
    let beta = model.weights();
    let mut s = commutator_superop(model.hamiltonian(), -1.0)?;
    for (n, v) in model.couplings().iter().enumerate() {
        s += schrodinger_dissipator(v, beta[0])?;
        s += schrodinger_dissipator(&v.adjoint(), beta[n + 1])?;
    }
    Superoperator::generator(s)
}

/// Heisenberg generator driven by thermal noises with weights
/// `ratios_plus = β_0/(β_0−β_i)` on `W_i` and `ratios_minus = β_i/(β_0−β_i)`
/// on `W_i*`. With ratios `(1, 0)` this is the zero-temperature (Fock) case.
pub fn lindblad_thermal(
    h: &CMatrix,
    w: &[CMatrix],
    ratios_plus: &[f64],
    ratios_minus: &[f64],
) -> Result<Superoperator> {
    if w.len() != ratios_plus.len() || w.len() != ratios_minus.len() {
        bail!(
            Dimension,
            "{} noise coefficients for {} / {} ratios",
            w.len(),
            ratios_plus.len(),
            ratios_minus.len()
        );
    }
    if let Some(i) = (0..w.len()).find(|&i| (ratios_plus[i] - ratios_minus[i] - 1.0).abs() > 1e-12) {
        bail!(
            Validation,
            "ratios for channel {} differ by {} instead of 1",
            i + 1,
            ratios_plus[i] - ratios_minus[i]
        );
    }
    let mut s = commutator_superop(h, 1.0)?;
    for ((wi, rp), rm) in w.iter().zip(ratios_plus).zip(ratios_minus) {
        s += heisenberg_dissipator(wi, *rp)?;
        s += heisenberg_dissipator(&wi.adjoint(), *rm)?;
    }
    Superoperator::generator(s)
}

/// `ρ_t = e^{tL}(ρ_0)`, re-Hermitized and validated.
pub fn evolve(generator: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        bail!(Validation, "evolution time must be finite and non-negative, got {t}");
    }
    if generator.dim() != rho0.dim() {
        bail!(Dimension, "generator acts on dimension {}, state has {}", generator.dim(), rho0.dim());
    }
    let propagator = mat_exp(&generator.matrix().scale(t))?;
    let raw = numkit::unvectorize(&(propagator * vectorize(rho0.matrix())), rho0.dim())?;
    DensityMatrix::new(hermitian_part(&raw))
        .map_err(|e| crate::Error::Numerical(alloc::format!("evolved state at t={t} is invalid: {e}")))
}
