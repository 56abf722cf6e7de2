//! Brute-force simulation on the truncated chain `H_S ⊗ (C^{N+1})^{⊗k}`.
//!
//! Sites are stored left to right in interaction order, so the flat index of
//! `|a⟩ ⊗ |σ_1⟩ ⊗ … ⊗ |σ_k⟩` is `a·m^k + σ_1·m^{k-1} + … + σ_k` with `m = N + 1`.

use alloc::vec::Vec;
use crate::error::{bail, Result};
use crate::model::{interaction_unitary, ModelSpec};
use crate::numkit::{self, herm_eig, identity, kron_all, zeros, CMatrix, CVector, C64};

/// Dimension limit for chain simulations that only keep state vectors.
pub const MAX_CHAIN_DIM: usize = 1 << 16;
/// Dimension limit for building a dense operator on the whole chain.
pub const MAX_DENSE_CHAIN_DIM: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    pub sites: usize,
    pub system_dim: usize,
    pub site_dim: usize,
    pub op: CMatrix,
}

impl ChainOperator {
    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn unitarity_defect(&self) -> f64 {
        numkit::max_abs_diff(&(&self.op * self.op.adjoint()), &identity(self.dim()))
    }
}

fn chain_dim(d: usize, m: usize, k: usize) -> Option<usize> {
    (0..k).try_fold(d, |acc, _| acc.checked_mul(m))
}

fn guard(d: usize, m: usize, k: usize, limit: usize) -> Result<usize> {
    match chain_dim(d, m, k) {
        Some(n) if n <= limit => Ok(n),
        _ => bail!(Resource, "chain of {k} sites with d={d}, N+1={m} exceeds dimension limit {limit}"),
    }
}

/// Places `a` on chain site `site` (1-based) of a `k`-site chain.
///
/// `a` acts either on one site (`m×m`) or on system ⊗ one site (`dm×dm`);
/// identities fill every other slot.
pub fn ampliate(a: &CMatrix, site: usize, k: usize, d: usize, m: usize) -> Result<ChainOperator> {
    if site == 0 || site > k {
        bail!(Validation, "site {site} out of range 1..={k}");
    }
    let n = numkit::ensure_square(a, "ampliated operator")?;
    let dim = guard(d, m, k, MAX_DENSE_CHAIN_DIM)?;
    let op = if n == m {
        let mut factors = Vec::with_capacity(k + 1);
        factors.push(identity(d));
        factors.extend((1..=k).map(|s| if s == site { a.clone() } else { identity(m) }));
        kron_all(&factors)
    } else if n == d * m {
        let stride = m.pow((k - site) as u32);
        let tail = m.pow(k as u32);
        let mut op = zeros(dim, dim);
        for (row, col) in site_pairs(dim, d, m, tail, stride) {
            let (ra, rs) = (row / tail, (row / stride) % m);
            let (ca, cs) = (col / tail, (col / stride) % m);
            op[(row, col)] = a[(ra * m + rs, ca * m + cs)];
        }
        op
    } else {
        bail!(Dimension, "operator of size {n} matches neither a site ({m}) nor system ⊗ site ({})", d * m);
    };
    Ok(ChainOperator { sites: k, system_dim: d, site_dim: m, op })
}

// Index pairs that agree on every chain slot except the active one.
fn site_pairs(dim: usize, d: usize, m: usize, tail: usize, stride: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |row| {
        let rest = row - (row / tail) * tail - ((row / stride) % m) * stride;
        (0..d).flat_map(move |a| (0..m).map(move |s| (row, a * tail + s * stride + rest)))
    })
}

/// `V_k = U_k ⋯ U_1`, site 1 acting first.
pub fn repeated_product(model: &ModelSpec, tau: f64, k: usize) -> Result<ChainOperator> {
    let (d, m) = (model.system_dim(), model.bath_dim());
    let dim = guard(d, m, k, MAX_DENSE_CHAIN_DIM)?;
    let u = interaction_unitary(model, tau)?;
    let mut op = identity(dim);
    for site in 1..=k {
        op = ampliate(&u, site, k, d, m)?.op * op;
    }
    Ok(ChainOperator { sites: k, system_dim: d, site_dim: m, op })
}

/// Applies a system ⊗ site operator to site `site` of a chain state vector in place.
fn apply_local(u: &CMatrix, psi: &mut CVector, d: usize, m: usize, k: usize, site: usize) {
    let tail = m.pow(k as u32);
    let stride = m.pow((k - site) as u32);
    let dm = d * m;
    let mut local = CVector::zeros(dm);
    for base in 0..tail {
        // visit each combination of the inactive slots once
        if !(base / stride).is_multiple_of(m) {
            continue;
        }
        for a in 0..d {
            for s in 0..m {
                local[a * m + s] = psi[a * tail + s * stride + base];
            }
        }
        let out = u * &local;
        for a in 0..d {
            for s in 0..m {
                psi[a * tail + s * stride + base] = out[a * m + s];
            }
        }
    }
}

/// Reduced system state after the first `interactions` sites of a product
/// chain with diagonal site states `site_weights` have interacted.
pub fn reduced_state_with_chain(
    model: &ModelSpec,
    tau: f64,
    rho0: &CMatrix,
    site_weights: &[Vec<f64>],
    interactions: usize,
) -> Result<CMatrix> {
    let (d, m) = (model.system_dim(), model.bath_dim());
    if rho0.shape() != (d, d) {
        bail!(Dimension, "initial state is {}x{}, system dimension is {d}", rho0.nrows(), rho0.ncols());
    }
    if interactions > site_weights.len() {
        bail!(Validation, "{interactions} interactions requested on a {}-site chain", site_weights.len());
    }
    if let Some(w) = site_weights.iter().find(|w| w.len() != m) {
        bail!(Dimension, "site state has {} weights, bath dimension is {m}", w.len());
    }
    let k = site_weights.len();
    let dim = guard(d, m, k, MAX_CHAIN_DIM)?;
    let tail = dim / d;
    let u = interaction_unitary(model, tau)?;

    let eig = herm_eig(rho0)?;
    let mut reduced = zeros(d, d);
    for (j, &p) in eig.values.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let psi0 = eig.vectors.column(j);
        for pattern in 0..tail {
            let mut weight = p;
            let mut rest = pattern;
            for s in (0..k).rev() {
                weight *= site_weights[s][rest % m];
                rest /= m;
            }
            if weight == 0.0 {
                continue;
            }
            let mut psi = CVector::zeros(dim);
            for a in 0..d {
                psi[a * tail + pattern] = psi0[a];
            }
            for site in 1..=interactions {
                apply_local(&u, &mut psi, d, m, k, site);
            }
            // tr_chain |ψ⟩⟨ψ| = Ψ Ψ* with Ψ the d × m^k reshaping of ψ
            let big_psi = CMatrix::from_fn(d, tail, |a, r| psi[a * tail + r]);
            reduced += (&big_psi * big_psi.adjoint()).scale(weight);
        }
    }
    Ok(reduced)
}

/// `tr_chain(V_k (ρ_0 ⊗ ρ_β^{⊗k}) V_k*)`.
pub fn reduced_state_after(model: &ModelSpec, tau: f64, rho0: &CMatrix, k: usize) -> Result<CMatrix> {
    if k == 0 {
        return Ok(rho0.clone());
    }
    let weights = alloc::vec![model.weights().to_vec(); k];
    reduced_state_with_chain(model, tau, rho0, &weights, k)
}

/// Exact global phase bookkeeping for decoupled chains: `e^{-iτ γ}` per site.
pub fn decoupled_site_phases(model: &ModelSpec, tau: f64) -> CMatrix {
    let phases = model.bath().gamma().iter().map(|g| C64::new(0.0, -tau * g).exp());
    CMatrix::from_diagonal(&CVector::from_iterator(model.bath_dim(), phases))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{interaction_map, iterate_map};
    use crate::model::{BathSpec, SystemSpec};
    use crate::numkit::{c, kron, mat_exp, matrix_unit, max_abs, max_abs_diff, trace};
    use crate::testutil::*;
    use alloc::vec;

    fn random_model(seed: u64, d: usize, n: usize, scale: f64) -> ModelSpec {
        let mut rng = rng(seed);
        let h = random_hermitian(&mut rng, d);
        let vs = (0..n).map(|_| random_matrix(&mut rng, d, d).scale(scale)).collect();
        let gamma: Vec<f64> = (0..=n).map(|i| 0.4 * i as f64).collect();
        let bath = BathSpec::with_weights(gamma, random_weights(&mut rng, n + 1)).unwrap();
        ModelSpec::new(SystemSpec::new(h, vs).unwrap(), bath).unwrap()
    }

    #[test]
    fn ampliation_basics() {
        let id = ampliate(&identity(3), 2, 3, 2, 3).unwrap();
        assert_eq!(id.op, identity(54));
        // a^0_1 = |e_1⟩⟨e_0| on site 2 of a 2-site qubit chain with d = 2
        let a01 = matrix_unit(2, 1, 0);
        let op = ampliate(&a01, 2, 2, 2, 2).unwrap().op;
        for a in 0..2 {
            let input = a * 4; // |a,0,0⟩
            let mut e = CVector::zeros(8);
            e[input] = c(1.0, 0.0);
            let out = &op * e;
            for r in 0..8 {
                let expect = if r == input + 1 { 1.0 } else { 0.0 };
                assert_eq!(out[r].re, expect);
            }
        }
        assert!(ampliate(&a01, 3, 2, 2, 2).is_err());
        assert!(ampliate(&identity(5), 1, 2, 2, 2).is_err());
    }

    #[test]
    fn ampliations_at_distinct_sites_commute() {
        let mut rng = rng(81);
        let a = random_matrix(&mut rng, 6, 6);
        let b = random_matrix(&mut rng, 3, 3);
        let x = ampliate(&a, 1, 2, 2, 3).unwrap().op;
        let y = ampliate(&b, 2, 2, 2, 3).unwrap().op;
        assert_eq!(max_abs(&(&x * &y - &y * &x)), 0.0);
        // system ⊗ site placement on site 1 of a 1-site chain is the operator itself
        assert_eq!(ampliate(&a, 1, 1, 2, 3).unwrap().op, a);
    }

    #[test]
    fn repeated_products() {
        let model = random_model(82, 2, 2, 0.6);
        let u = interaction_unitary(&model, 0.1).unwrap();
        assert_eq!(repeated_product(&model, 0.1, 1).unwrap().op, u);
        let v3 = repeated_product(&model, 0.1, 3).unwrap();
        assert_eq!(v3.dim(), 54);
        assert!(v3.unitarity_defect() <= 1e-11);

        let free = model.with_system(model.hamiltonian().clone(), vec![zeros(2, 2); 2]).unwrap();
        let tau = 0.3;
        let v2 = repeated_product(&free, tau, 2).unwrap();
        let sys = mat_exp(&free.hamiltonian().map(|z| z * c(0.0, -2.0 * tau))).unwrap();
        let ph = decoupled_site_phases(&free, tau);
        assert!(max_abs_diff(&v2.op, &kron(&kron(&sys, &ph), &ph)) < 1e-13);
    }

    #[test]
    fn reduced_state_trivial_cases() {
        let model = random_model(83, 2, 1, 0.7);
        let rho = random_density(&mut rng(84), 2);
        assert_eq!(reduced_state_after(&model, 0.1, &rho, 0).unwrap(), rho);

        let free = model.with_system(model.hamiltonian().clone(), vec![zeros(2, 2)]).unwrap();
        let out = reduced_state_after(&free, 0.2, &rho, 3).unwrap();
        let u = mat_exp(&free.hamiltonian().map(|z| z * c(0.0, -0.6))).unwrap();
        assert!(max_abs_diff(&out, &(&u * &rho * u.adjoint())) < 1e-13);
    }

    #[test]
    fn chain_matches_iterated_map() {
        for seed in 0..3 {
            for n in 1..=2 {
                let model = random_model(90 + seed, 2, n, 0.8);
                let rho = random_density(&mut rng(300 + seed), 2);
                let map = interaction_map(&model, 0.15).unwrap();
                for k in 0..=4 {
                    let chain = reduced_state_after(&model, 0.15, &rho, k).unwrap();
                    let iterated = iterate_map(&map, &rho, k).unwrap();
                    assert!(max_abs_diff(&chain, &iterated) <= 1e-10);
                    assert!((trace(&chain) - c(1.0, 0.0)).norm() <= 1e-12);
                    assert!(numkit::hermiticity_defect(&chain) <= 1e-12);
                    assert!(herm_eig(&numkit::hermitian_part(&chain)).unwrap().values[0] >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn future_sites_do_not_matter() {
        let model = random_model(85, 2, 2, 0.8);
        let rho = random_density(&mut rng(86), 2);
        let w1 = vec![0.5, 0.3, 0.2];
        let w2 = vec![0.7, 0.2, 0.1];
        let w3 = vec![0.4, 0.35, 0.25];
        let a = reduced_state_with_chain(&model, 0.2, &rho, &[w1.clone(), w2.clone(), w3.clone()], 1).unwrap();
        let b = reduced_state_with_chain(&model, 0.2, &rho, &[w1.clone(), w3, w2], 1).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-13);
        let one = reduced_state_with_chain(&model, 0.2, &rho, &[w1], 1).unwrap();
        assert!(max_abs_diff(&a, &one) < 1e-13);
    }

    #[test]
    fn size_guards() {
        let model = random_model(87, 2, 2, 0.5);
        assert!(matches!(repeated_product(&model, 0.1, 8), Err(crate::Error::Resource(_))));
        let rho = random_density(&mut rng(88), 2);
        assert!(matches!(reduced_state_after(&model, 0.1, &rho, 10), Err(crate::Error::Resource(_))));
    }
}
