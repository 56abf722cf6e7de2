//! GNS representation of the bath state and the coefficients of `π(U)`.
//!
//! The bath state `ρ_β = diag(β)` turns `L(C^{N+1})` into a Hilbert space
//! with `⟨A, B⟩ = tr(ρ_β A* B)`. In the orthonormal basis `X^i_j` below, any
//! operator `K` on system ⊗ bath becomes an `(N+1)² × (N+1)²` array of system
//! operators `K^{i,j}_{k,l} = tr_H(ρ_β (X^k_l)* K X^i_j)`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{bail, Result};
use crate::model::{interaction_unitary, ModelSpec, WEIGHT_SUM_TOL};
use crate::numkit::{self, c, diag, identity, matrix_unit, max_abs_diff, zeros, CMatrix, C64};

/// Multi-index `(i, j, k, l)` of a coefficient `K^{i,j}_{k,l}`.
pub type CoeffIndex = (usize, usize, usize, usize);

#[derive(Debug, Clone)]
pub struct GnsBasis {
    weights: Vec<f64>,
    elements: Vec<CMatrix>,
}

impl GnsBasis {
    pub fn levels(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `X^i_j`.
    pub fn element(&self, i: usize, j: usize) -> &CMatrix {
        &self.elements[i * self.levels() + j]
    }

    /// Diagonal entries `λ^0_i..λ^N_i` of `X^i_i`.
    pub fn diagonal_coefficients(&self, i: usize) -> Vec<f64> {
        let x = self.element(i, i);
        (0..self.levels()).map(|p| x[(p, p)].re).collect()
    }

    /// `tr(ρ_β A* B)`.
    pub fn inner(&self, a: &CMatrix, b: &CMatrix) -> C64 {
        let ab = a.adjoint() * b;
        self.weights.iter().enumerate().map(|(p, w)| ab[(p, p)] * *w).sum()
    }

    /// Gram matrix over all `(N+1)²` elements in row-major `(i, j)` order.
    pub fn gram(&self) -> CMatrix {
        let n = self.elements.len();
        CMatrix::from_fn(n, n, |r, s| self.inner(&self.elements[r], &self.elements[s]))
    }

    fn state_times_adjoint(&self, x: &CMatrix) -> CMatrix {
        diag(&self.weights) * x.adjoint()
    }

    fn checked(&self, i: usize, j: usize) -> Result<&CMatrix> {
        if i >= self.levels() || j >= self.levels() {
            bail!(Validation, "basis index ({i},{j}) out of range for {} levels", self.levels());
        }
        Ok(self.element(i, j))
    }
}

/// Builds `X^0_0 = I`, `X^i_j = β_i^{-1/2}|e_j⟩⟨e_i|` for `i ≠ j`, and diagonal
/// `X^i_i` from weighted Gram–Schmidt of `e_0, e_1, …` against `(1,…,1)`,
/// each with its leading nonzero entry positive.
pub fn build_gns_basis(weights: &[f64]) -> Result<GnsBasis> {
    let m = weights.len();
    if m < 2 {
        bail!(Validation, "GNS basis needs at least two levels");
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        bail!(Validation, "GNS weights must be strictly positive");
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        bail!(Validation, "GNS weights sum to {sum}, expected 1");
    }

    let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).zip(weights).map(|((a, b), w)| a * b * w).sum() };
    let mut diagonal: Vec<Vec<f64>> = alloc::vec![alloc::vec![1.0; m]];
    for p in 0..m {
        if diagonal.len() == m {
            break;
        }
        let mut v = alloc::vec![0.0; m];
        v[p] = 1.0;
        for q in &diagonal {
            let proj = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
        }
        let nrm = Float::sqrt(dot(&v, &v));
        if nrm < 1e-8 {
            continue;
        }
        let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|a| *a *= sign / nrm);
        diagonal.push(v);
    }
    debug_assert_eq!(diagonal.len(), m);

    let mut elements = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let x = if i == j {
                if i == 0 {
                    identity(m)
                } else {
                    diag(&diagonal[i])
                }
            } else {
                // a^i_j e_k = δ_ik e_j, i.e. a^i_j = |e_j⟩⟨e_i|
                matrix_unit(m, j, i).unscale(Float::sqrt(weights[i]))
            };
            elements.push(x);
        }
    }
    Ok(GnsBasis { weights: weights.to_vec(), elements })
}

/// `d×d` block `⟨e_b|U|e_c⟩` of an operator on system ⊗ bath.
fn bath_block(u: &CMatrix, d: usize, m: usize, b: usize, col: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |s, t| u[(s * m + b, t * m + col)])
}

fn split_dims(u: &CMatrix, basis: &GnsBasis) -> Result<(usize, usize)> {
    let m = basis.levels();
    let n = numkit::ensure_square(u, "operator")?;
    if n % m != 0 {
        bail!(Dimension, "operator of size {n} does not factor over a {m}-level bath");
    }
    Ok((n / m, m))
}

/// `U^{i,j}_{k,l} = tr_H(ρ_β (X^k_l)* U X^i_j)`.
pub fn gns_coefficient(u: &CMatrix, basis: &GnsBasis, idx: CoeffIndex) -> Result<CMatrix> {
    let (i, j, k, l) = idx;
    let (d, m) = split_dims(u, basis)?;
    let right = basis.checked(i, j)?;
    let left = basis.state_times_adjoint(basis.checked(k, l)?);
    Ok(coefficient_from_factors(u, d, m, &(right * left)))
}

// Σ_{a,b,c} A[a,b] U_bc B[c,a] = Σ_{b,c} (BA)[c,b] U_bc
fn coefficient_from_factors(u: &CMatrix, d: usize, m: usize, ba: &CMatrix) -> CMatrix {
    let mut out = zeros(d, d);
    for b in 0..m {
        for col in 0..m {
            let w = ba[(col, b)];
            if w.norm() != 0.0 {
                out += bath_block(u, d, m, b, col).map(|z| z * w);
            }
        }
    }
    out
}

/// Every coefficient of `π(U)`, indexed by [`CoeffIndex`].
#[derive(Debug, Clone)]
pub struct CoeffTable {
    levels: usize,
    entries: Vec<CMatrix>,
}

impl CoeffTable {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, idx: CoeffIndex) -> &CMatrix {
        &self.entries[flat(self.levels, idx)]
    }

    pub fn indices(&self) -> impl Iterator<Item = CoeffIndex> {
        all_indices(self.levels)
    }

    /// `π(U)` as a block matrix: block row `(k,l)`, block column `(i,j)`.
    pub fn as_block_matrix(&self) -> CMatrix {
        let m = self.levels;
        let d = self.entries[0].nrows();
        let pairs = m * m;
        let mut out = zeros(pairs * d, pairs * d);
        for idx @ (i, j, k, l) in self.indices() {
            out.view_mut(((k * m + l) * d, (i * m + j) * d), (d, d)).copy_from(self.get(idx));
        }
        out
    }
}

fn flat(m: usize, (i, j, k, l): CoeffIndex) -> usize {
    ((i * m + j) * m + k) * m + l
}

pub fn all_indices(m: usize) -> impl Iterator<Item = CoeffIndex> {
    (0..m * m * m * m).map(move |f| (f / (m * m * m), (f / (m * m)) % m, (f / m) % m, f % m))
}

pub fn coefficient_table(u: &CMatrix, basis: &GnsBasis) -> Result<CoeffTable> {
    let (d, m) = split_dims(u, basis)?;
    let lefts: Vec<CMatrix> = (0..m * m).map(|p| basis.state_times_adjoint(&basis.elements[p])).collect();
    let entries = all_indices(m)
        .map(|(i, j, k, l)| {
            let ba = basis.element(i, j) * &lefts[k * m + l];
            coefficient_from_factors(u, d, m, &ba)
        })
        .collect();
    Ok(CoeffTable { levels: m, entries })
}

/// Scaling exponent: 1 for `(0,0,0,0)`, 1/2 when exactly one of the pairs is
/// `(0,0)`, otherwise 0.
pub fn epsilon((i, j, k, l): CoeffIndex) -> f64 {
    let upper = i == 0 && j == 0;
    let lower = k == 0 && l == 0;
    match (upper, lower) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.5,
        (false, false) => 0.0,
    }
}

/// Closed-form limits `L^{i,j}_{k,l}` of `(U^{i,j}_{k,l} − δ I)/τ^ε`.
#[derive(Debug, Clone)]
pub struct LimitTable {
    levels: usize,
    entries: Vec<CMatrix>,
}

impl LimitTable {
    pub fn get(&self, idx: CoeffIndex) -> &CMatrix {
        &self.entries[flat(self.levels, idx)]
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn epsilon(&self, idx: CoeffIndex) -> f64 {
        epsilon(idx)
    }
}

pub fn theoretical_limits(model: &ModelSpec) -> LimitTable {
    let m = model.bath_dim();
    let d = model.system_dim();
    let beta = model.weights();
    let gamma = model.bath().gamma();
    let mut entries = alloc::vec![zeros(d, d); m * m * m * m];

    let shift: f64 = beta.iter().zip(gamma).map(|(b, g)| b * g).sum();
    let mut drift = model.hamiltonian().map(|z| z * c(0.0, -1.0)) - identity(d).map(|z| z * c(0.0, shift));
    for (n, v) in model.couplings().iter().enumerate() {
        let i = n + 1;
        let vd = v.adjoint();
        drift -= (&vd * v).scale(0.5 * beta[0]) + (v * &vd).scale(0.5 * beta[i]);
        let minus_i = c(0.0, -1.0);
        let sb0 = Float::sqrt(beta[0]);
        let sbi = Float::sqrt(beta[i]);
        entries[flat(m, (i, 0, 0, 0))] = v.map(|z| z * minus_i * sbi);
        entries[flat(m, (0, i, 0, 0))] = vd.map(|z| z * minus_i * sb0);
        entries[flat(m, (0, 0, i, 0))] = vd.map(|z| z * minus_i * sbi);
        entries[flat(m, (0, 0, 0, i))] = v.map(|z| z * minus_i * sb0);
    }
    entries[0] = drift;
    LimitTable { levels: m, entries }
}

/// Rescaled coefficient `(U^{i,j}_{k,l}(τ) − δ I)/τ^ε`.
pub fn rescaled(table: &CoeffTable, idx: CoeffIndex, tau: f64) -> CMatrix {
    let (i, j, k, l) = idx;
    let mut x = table.get(idx).clone();
    if (i, j) == (k, l) {
        let d = x.nrows();
        x -= identity(d);
    }
    x.unscale(Float::powf(tau, epsilon(idx)))
}

/// Residuals below this are treated as exact and get no fitted order.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct EntryFit {
    pub index: CoeffIndex,
    pub epsilon: f64,
    pub theoretical: CMatrix,
    /// Rescaled coefficient at the smallest τ.
    pub estimate: CMatrix,
    /// Two-point Richardson extrapolation from the two smallest τ.
    pub extrapolated: CMatrix,
    /// `‖estimate(τ) − L‖_max` for every τ of the ladder.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `ln residual` against `ln τ`.
    pub fitted_order: Option<f64>,
}

impl EntryFit {
    pub fn residual(&self) -> f64 {
        *self.residuals.last().expect("ladder is non-empty")
    }

    pub fn extrapolated_residual(&self) -> f64 {
        max_abs_diff(&self.extrapolated, &self.theoretical)
    }

    /// Strictly decreasing residuals along the ladder (trivially true for exact entries).
    pub fn is_monotone(&self) -> bool {
        self.residuals.iter().all(|r| *r <= EXACT_FLOOR) || self.residuals.windows(2).all(|w| w[1] < w[0])
    }

    pub fn has_nonzero_limit(&self) -> bool {
        numkit::max_abs(&self.theoretical) > 0.0
    }
}

#[derive(Debug, Clone)]
pub struct EmpiricalLimits {
    pub taus: Vec<f64>,
    pub entries: Vec<EntryFit>,
}

impl EmpiricalLimits {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(EntryFit::residual).fold(0.0, f64::max)
    }

    pub fn entry(&self, idx: CoeffIndex) -> Option<&EntryFit> {
        self.entries.iter().find(|e| e.index == idx)
    }
}

pub fn validate_ladder(taus: &[f64]) -> Result<()> {
    if taus.len() < 4 {
        bail!(Validation, "need at least 4 interaction times, got {}", taus.len());
    }
    if taus.iter().any(|t| !(*t > 0.0 && *t <= 0.5)) {
        bail!(Validation, "interaction times must lie in (0, 0.5]");
    }
    if taus.windows(2).any(|w| w[1] >= w[0]) {
        bail!(Validation, "interaction times must be strictly descending");
    }
    Ok(())
}

/// Rescales the coefficients of `π(U(τ))` along a descending τ ladder and
/// compares them with [`theoretical_limits`].
pub fn empirical_limits(model: &ModelSpec, taus: &[f64]) -> Result<EmpiricalLimits> {
    validate_ladder(taus)?;
    let basis = build_gns_basis(model.weights())?;
    let limits = theoretical_limits(model);
    let tables = taus
        .iter()
        .map(|&tau| coefficient_table(&interaction_unitary(model, tau)?, &basis))
        .collect::<Result<Vec<_>>>()?;

    let n = taus.len();
    let entries = all_indices(basis.levels())
        .map(|idx| {
            let theoretical = limits.get(idx).clone();
            let values: Vec<CMatrix> = tables.iter().zip(taus).map(|(t, &tau)| rescaled(t, idx, tau)).collect();
            let residuals: Vec<f64> = values.iter().map(|v| max_abs_diff(v, &theoretical)).collect();
            let fitted_order = if residuals.iter().all(|r| *r > EXACT_FLOOR) {
                Some(numkit::log_log_slope(taus, &residuals))
            } else {
                None
            };
            let order = fitted_order.filter(|p| p.is_finite() && *p > 0.25).unwrap_or(1.0);
            let ratio = Float::powf(taus[n - 2] / taus[n - 1], order);
            let extrapolated = (values[n - 1].scale(ratio) - &values[n - 2]).unscale(ratio - 1.0);
            EntryFit {
                index: idx,
                epsilon: epsilon(idx),
                theoretical,
                estimate: values[n - 1].clone(),
                extrapolated,
                residuals,
                fitted_order,
            }
        })
        .collect();
    Ok(EmpiricalLimits { taus: taus.to_vec(), entries })
}

/// Closed-form coefficients when every coupling vanishes:
/// `U = e^{-iτH_S} ⊗ diag(e^{-iτγ_p})`, so `U^{i,j}_{k,l} = e^{-iτH_S}·⟨X^k_l, D X^i_j⟩`.
pub fn decoupled_coefficients(model: &ModelSpec, basis: &GnsBasis, tau: f64) -> Result<CoeffTable> {
    let m = basis.levels();
    let system = numkit::mat_exp(&model.hamiltonian().map(|z| z * c(0.0, -tau)))?;
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        model.bath().gamma().iter().map(|g| c(0.0, -tau * g).exp()),
    ));
    let entries = all_indices(m)
        .map(|(i, j, k, l)| {
            let s = basis.inner(basis.element(k, l), &(&phases * basis.element(i, j)));
            system.map(|z| z * s)
        })
        .collect();
    Ok(CoeffTable { levels: m, entries })
}
