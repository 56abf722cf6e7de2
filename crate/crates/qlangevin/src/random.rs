//! Seeded generators for random models and states.

use qlangevin_core::dynamics::DensityMatrix;
use qlangevin_core::model::{BathSpec, ModelSpec, SystemSpec};
use qlangevin_core::numkit::singular_values;
use qlangevin_core::{CMatrix, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name recorded next to the seed in every report that draws random numbers.
pub const RNG_NAME: &str = "ChaCha8Rng";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let a = random_matrix(rng, d, d);
    (&a + a.adjoint()).scale(0.5)
}

/// Full-rank `A A* / tr(A A*)`.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    let a = random_matrix(rng, d, d);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let m = m.unscale(tr);
    DensityMatrix::new((&m + m.adjoint()).scale(0.5)).expect("A A* is a valid state")
}

/// Normalized, strictly decreasing weights with `β_{i+1} ≤ 0.9 β_i`.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for _ in 1..n {
        let last = *w.last().unwrap();
        w.push(last * rng.random_range(0.2..=0.9));
    }
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Random `d`-level system with `n` couplings of operator norm `coupling_norm`,
/// bath levels `γ_i = 0.7 i + 0.1` and random decreasing weights.
pub fn random_model<R: Rng>(rng: &mut R, d: usize, n: usize, coupling_norm: f64) -> Result<ModelSpec> {
    let h = random_hermitian(rng, d);
    let vs = (0..n)
        .map(|_| {
            let v = random_matrix(rng, d, d);
            let top = singular_values(&v)[0];
            v.scale(coupling_norm / top)
        })
        .collect();
    let gamma = (0..=n).map(|i| 0.7 * i as f64 + 0.1).collect();
    let bath = BathSpec::with_weights(gamma, random_weights(rng, n + 1))?;
    ModelSpec::new(SystemSpec::new(h, vs)?, bath)
}
