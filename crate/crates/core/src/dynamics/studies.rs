use alloc::vec::Vec;
use num_traits::Float;

use super::{
    interaction_map, lindblad_schrodinger, stationary_states, trace_distance, DensityMatrix, Superoperator,
};
use crate::error::{bail, Result};
use crate::model::ModelSpec;
use crate::numkit::{self, unvectorize, vectorize, CMatrix};

/// `Φ^k(ρ)` by repeated application.
pub fn iterate_map(map: &Superoperator, rho: &CMatrix, k: usize) -> Result<CMatrix> {
    let d = map.dim();
    let mut v = vectorize(rho);
    for _ in 0..k {
        v = map.matrix() * v;
    }
    unvectorize(&v, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub steps: usize,
    pub trace_distance: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln err` against `ln τ`.
    pub slope: f64,
}

impl ConvergenceStudy {
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].trace_distance < w[0].trace_distance)
    }
}

/// Distance between `⌊t/τ⌋` repeated interactions and the limiting semigroup at time `t`.
pub fn convergence_study(model: &ModelSpec, rho0: &DensityMatrix, t: f64, taus: &[f64]) -> Result<ConvergenceStudy> {
    if !(t > 0.0) || !t.is_finite() {
        bail!(Validation, "final time must be positive, got {t}");
    }
    if taus.is_empty() {
        bail!(Validation, "no interaction times given");
    }
    if taus.iter().any(|tau| !(*tau > 0.0 && *tau <= t)) {
        bail!(Validation, "every interaction time must lie in (0, t]");
    }
    if taus.windows(2).any(|w| w[1] >= w[0]) {
        bail!(Validation, "interaction times must be strictly descending");
    }
    let generator = lindblad_schrodinger(model)?;
    let limit = super::evolve(&generator, rho0, t)?;
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        // guard against t/τ landing a hair below an integer
        let steps = Float::floor(t / tau + 1e-9) as usize;
        let map = interaction_map(model, tau)?;
        let discrete = iterate_map(&map, rho0.matrix(), steps)?;
        rows.push(ConvergenceRow { tau, steps, trace_distance: trace_distance(&discrete, limit.matrix()) });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.trace_distance).collect();
    Ok(ConvergenceStudy { rows, slope: numkit::log_log_slope(&xs, &ys) })
}

/// Distances `d(t)` inside this window feed the exponential rate fit.
pub const TAIL_WINDOW: (f64, f64) = (1e-8, 1e-2);

#[derive(Debug, Clone)]
pub struct RelaxationStudy {
    pub stationary: DensityMatrix,
    /// `(t, ½‖ρ_t − ρ_∞‖₁)`.
    pub rows: Vec<(f64, f64)>,
    /// Decay rate fitted on the tail window, if it holds at least two points.
    pub rate: Option<f64>,
}

impl RelaxationStudy {
    pub fn final_distance(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.1)
    }
}

/// Relaxation of `ρ_0` towards the unique invariant state of the limit generator.
pub fn return_to_equilibrium(model: &ModelSpec, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<RelaxationStudy> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.iter().any(|t| !(*t >= 0.0)) {
        bail!(Validation, "time grid must be non-negative and strictly ascending");
    }
    let generator = lindblad_schrodinger(model)?;
    let stationary = stationary_states(&generator)?;
    if !stationary.is_unique() {
        bail!(
            Validation,
            "stationary state is not unique (null-space dimension {})",
            stationary.null_dim
        );
    }
    let target = stationary.states[0].clone();
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let rho = super::evolve(&generator, rho0, t)?;
        rows.push((t, trace_distance(rho.matrix(), target.matrix())));
    }
    let (ts, logs): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|(_, dist)| *dist >= TAIL_WINDOW.0 && *dist <= TAIL_WINDOW.1)
        .map(|(t, dist)| (*t, Float::ln(*dist)))
        .unzip();
    let rate = (ts.len() >= 2).then(|| -numkit::ls_slope(&ts, &logs));
    Ok(RelaxationStudy { stationary: target, rows, rate })
}
