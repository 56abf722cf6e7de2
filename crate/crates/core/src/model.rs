//! The physical model: a small system `H_S` coupled through `V_1..V_N` to
//! one `(N+1)`-level bath copy with energies `γ` in the diagonal state `β`.
//!
//! Tensor factors are always ordered system ⊗ bath.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{bail, Result};
use crate::numkit::{
    self, diag, hermitian_part, hermiticity_defect, identity, kron, mat_exp, matrix_unit, CMatrix, C64,
    HERMITIAN_TOL,
};

/// Tolerance on `Σβ_i = 1` for bath weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    h_s: CMatrix,
    couplings: Vec<CMatrix>,
}

impl SystemSpec {
    pub fn new(h_s: CMatrix, couplings: Vec<CMatrix>) -> Result<Self> {
        let d = numkit::ensure_square(&h_s, "H_S")?;
        if d == 0 {
            bail!(Validation, "system dimension must be at least 1");
        }
        if !numkit::is_finite(&h_s) {
            bail!(Validation, "H_S has non-finite entries");
        }
        let defect = hermiticity_defect(&h_s);
        if defect > HERMITIAN_TOL {
            bail!(Validation, "H_S is not Hermitian (max |H - H*| = {defect:e})");
        }
        if couplings.is_empty() {
            bail!(Validation, "at least one coupling operator is required");
        }
        for (i, v) in couplings.iter().enumerate() {
            if v.shape() != (d, d) {
                bail!(Dimension, "coupling V_{} is {}x{}, expected {d}x{d}", i + 1, v.nrows(), v.ncols());
            }
            if !numkit::is_finite(v) {
                bail!(Validation, "coupling V_{} has non-finite entries", i + 1);
            }
        }
        Ok(Self { h_s: hermitian_part(&h_s), couplings })
    }

    pub fn dim(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h_s
    }

    /// `V_1..V_N`; index 0 of the slice is `V_1`.
    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }
}

/// One bath copy: levels `γ_0..γ_N` and diagonal state weights `β_0..β_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    gamma: Vec<f64>,
    weights: Vec<f64>,
    inverse_temperature: Option<f64>,
}

impl BathSpec {
    /// Arbitrary diagonal state. Requires `γ_0 < γ_i`, positive weights summing
    /// to one and `β_0 ≥ β_i`. Equality is allowed here; operations that divide
    /// by `β_0 − β_i` reject it themselves.
    pub fn with_weights(gamma: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_levels(&gamma)?;
        if weights.len() != gamma.len() {
            bail!(Dimension, "{} weights given for {} bath levels", weights.len(), gamma.len());
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            bail!(Validation, "bath weights must be finite and strictly positive");
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            bail!(Validation, "bath weights sum to {sum}, expected 1");
        }
        if let Some(i) = (1..weights.len()).find(|&i| weights[i] > weights[0]) {
            bail!(Validation, "weight β_{i} = {} exceeds β_0 = {}", weights[i], weights[0]);
        }
        Ok(Self { gamma, weights, inverse_temperature: None })
    }

    /// Gibbs state `e^{-βγ}/Z` of the bath levels.
    pub fn gibbs(gamma: Vec<f64>, beta: f64) -> Result<Self> {
        let weights = gibbs_weights(&gamma, beta)?;
        let mut bath = Self::with_weights(gamma, weights)?;
        bath.inverse_temperature = Some(beta);
        Ok(bath)
    }

    /// Number of excited levels `N`.
    pub fn excited_levels(&self) -> usize {
        self.gamma.len() - 1
    }

    /// Dimension `N + 1` of one bath copy.
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Inverse temperature when the state was built as a Gibbs state.
    pub fn inverse_temperature(&self) -> Option<f64> {
        self.inverse_temperature
    }

    /// `diag(β_0..β_N)`.
    pub fn state(&self) -> CMatrix {
        diag(&self.weights)
    }

    /// Fails unless `β_0 > β_i` for every excited level.
    pub fn ensure_nondegenerate(&self) -> Result<()> {
        let b0 = self.weights[0];
        if let Some(i) = (1..self.weights.len()).find(|&i| self.weights[i] >= b0) {
            bail!(
                Validation,
                "degenerate bath state: β_0 = {b0} and β_{i} = {} (need β_0 > β_i)",
                self.weights[i]
            );
        }
        Ok(())
    }
}

fn check_levels(gamma: &[f64]) -> Result<()> {
    if gamma.len() < 2 {
        bail!(Validation, "a bath needs at least two levels, got {}", gamma.len());
    }
    if gamma.iter().any(|g| !g.is_finite()) {
        bail!(Validation, "bath levels must be finite");
    }
    if let Some(i) = (1..gamma.len()).find(|&i| gamma[i] <= gamma[0]) {
        bail!(Validation, "γ_0 = {} must lie strictly below γ_{i} = {}", gamma[0], gamma[i]);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    system: SystemSpec,
    bath: BathSpec,
}

impl ModelSpec {
    pub fn new(system: SystemSpec, bath: BathSpec) -> Result<Self> {
        if system.couplings().len() != bath.excited_levels() {
            bail!(
                Dimension,
                "{} couplings for {} excited bath levels",
                system.couplings().len(),
                bath.excited_levels()
            );
        }
        Ok(Self { system, bath })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn system_dim(&self) -> usize {
        self.system.dim()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath.dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.bath.weights()
    }

    pub fn couplings(&self) -> &[CMatrix] {
        self.system.couplings()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        self.system.hamiltonian()
    }

    /// Same bath, new system side.
    pub fn with_system(&self, h_s: CMatrix, couplings: Vec<CMatrix>) -> Result<Self> {
        Self::new(SystemSpec::new(h_s, couplings)?, self.bath.clone())
    }
}

/// `e^{-βγ_i}/Z`, evaluated relative to `γ_0` so nothing overflows.
pub fn gibbs_weights(gamma: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        bail!(Validation, "inverse temperature must be finite and non-negative, got {beta}");
    }
    check_levels(gamma)?;
    let g0 = gamma[0];
    let boltzmann: Vec<f64> = gamma.iter().map(|g| Float::exp(-beta * (g - g0))).collect();
    let z: f64 = boltzmann.iter().sum();
    Ok(boltzmann.into_iter().map(|b| b / z).collect())
}

/// `H = H_S⊗I + I⊗H_R + τ^{-1/2} Σ (V_i⊗a^0_i + V_i*⊗a^i_0)` with
/// `a^0_i = |e_i⟩⟨e_0|` and `H_R = diag(γ)`.
pub fn total_hamiltonian(model: &ModelSpec, tau: f64) -> Result<CMatrix> {
    if !(tau > 0.0) || !tau.is_finite() {
        bail!(Validation, "interaction time must be positive, got {tau}");
    }
    let m = model.bath_dim();
    let d = model.system_dim();
    let mut h = kron(model.hamiltonian(), &identity(m)) + kron(&identity(d), &diag(model.bath.gamma()));
    let g = 1.0 / Float::sqrt(tau);
    for (k, v) in model.couplings().iter().enumerate() {
        let i = k + 1;
        let up = kron(v, &matrix_unit(m, i, 0));
        let down = kron(&v.adjoint(), &matrix_unit(m, 0, i));
        h += (up + down).scale(g);
    }
    Ok(h)
}

/// `U(τ) = exp(-iτH(τ))`.
pub fn interaction_unitary(model: &ModelSpec, tau: f64) -> Result<CMatrix> {
    let h = total_hamiltonian(model, tau)?;
    mat_exp(&h.map(|z| z * C64::new(0.0, -tau)))
}

/// Ladder operators `V_i = |e_0⟩⟨e_i|`, `i = 1..dim-1`.
///
/// This is the orientation for which the thermalizing generator annihilates
/// the Gibbs state; the transposed one `|e_i⟩⟨e_0|` leaves a residual of
/// order `β_0² − β_i²`.
pub fn ladder_couplings(dim: usize) -> Result<Vec<CMatrix>> {
    if dim < 2 {
        bail!(Validation, "ladder couplings need dimension >= 2, got {dim}");
    }
    Ok((1..dim).map(|i| matrix_unit(dim, 0, i)).collect())
}

/// System `diag(λ)` coupled by ladder operators to copies of itself in the
/// Gibbs state at inverse temperature `beta`.
pub fn thermalization_model(levels: &[f64], beta: f64) -> Result<ModelSpec> {
    let bath = BathSpec::gibbs(levels.to_vec(), beta)?;
    let system = SystemSpec::new(diag(levels), ladder_couplings(levels.len())?)?;
    ModelSpec::new(system, bath)
}
