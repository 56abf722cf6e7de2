use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numkit::{c, hermitian_part, CMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    hermitian_part(&random_matrix(rng, n, n))
}

pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let p = &g * g.adjoint();
    let tr = crate::numkit::trace(&p).re;
    p.unscale(tr)
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> alloc::vec::Vec<f64> {
    let mut w: alloc::vec::Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    // strictly decreasing, with a margin so β_0 − β_i stays away from zero
    for i in 1..n {
        if w[i] > w[i - 1] * 0.9 {
            w[i] = w[i - 1] * 0.9;
        }
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}
