//! Quantum Itô tables for Fock and thermal noises, and the algebraic
//! unitarity conditions for Langevin equations driven by them.
//!
//! `Fock(i, j)` is `da^i_j`. The thermal creation noise `dA^0_i` is `APlus(i)`
//! and the annihilation noise `dA^i_0` is `AMinus(i)`; at zero temperature
//! they reduce to `Fock(0, i)` and `Fock(i, 0)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::error::{bail, Result};
use crate::model::ModelSpec;
use crate::numkit::{self, identity, zeros, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ItoSymbol {
    Dt,
    Fock(usize, usize),
    APlus(usize),
    AMinus(usize),
}

impl ItoSymbol {
    /// `Fock(0, 0)` is the time differential.
    pub fn canonical(self) -> Self {
        match self {
            ItoSymbol::Fock(0, 0) => ItoSymbol::Dt,
            s => s,
        }
    }

    pub fn adjoint(self) -> Self {
        match self.canonical() {
            ItoSymbol::Dt => ItoSymbol::Dt,
            ItoSymbol::Fock(i, j) => ItoSymbol::Fock(j, i),
            ItoSymbol::APlus(i) => ItoSymbol::AMinus(i),
            ItoSymbol::AMinus(i) => ItoSymbol::APlus(i),
        }
    }

    fn is_thermal(self) -> bool {
        matches!(self.canonical(), ItoSymbol::Dt | ItoSymbol::APlus(_) | ItoSymbol::AMinus(_))
    }
}

impl fmt::Display for ItoSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.canonical() {
            ItoSymbol::Dt => write!(f, "dt"),
            ItoSymbol::Fock(i, j) => write!(f, "da^{i}_{j}"),
            ItoSymbol::APlus(i) => write!(f, "dA^0_{i}"),
            ItoSymbol::AMinus(i) => write!(f, "dA^{i}_0"),
        }
    }
}

/// A finite sum `Σ C_s ds` with `d×d` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoExpr {
    dim: usize,
    terms: BTreeMap<ItoSymbol, CMatrix>,
}

impl ItoExpr {
    pub fn zero(dim: usize) -> Self {
        ItoExpr { dim, terms: BTreeMap::new() }
    }

    pub fn term(symbol: ItoSymbol, coeff: CMatrix) -> Result<Self> {
        let mut e = ItoExpr::zero(numkit::ensure_square(&coeff, "Itô coefficient")?);
        e.add_term(symbol, coeff)?;
        Ok(e)
    }

    pub fn scalar(symbol: ItoSymbol, coeff: C64) -> Self {
        let mut e = ItoExpr::zero(1);
        e.terms.insert(symbol.canonical(), CMatrix::from_element(1, 1, coeff));
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ItoSymbol, &CMatrix)> {
        self.terms.iter()
    }

    /// Coefficient of `symbol`, zero if absent.
    pub fn coeff(&self, symbol: ItoSymbol) -> CMatrix {
        self.terms.get(&symbol.canonical()).cloned().unwrap_or_else(|| zeros(self.dim, self.dim))
    }

    pub fn add_term(&mut self, symbol: ItoSymbol, coeff: CMatrix) -> Result<()> {
        if coeff.shape() != (self.dim, self.dim) {
            bail!(Dimension, "coefficient is {}x{}, expression dimension is {}", coeff.nrows(), coeff.ncols(), self.dim);
        }
        if !numkit::is_finite(&coeff) {
            bail!(Numerical, "non-finite coefficient for {symbol}");
        }
        let sym = symbol.canonical();
        match self.terms.get_mut(&sym) {
            Some(c) => *c += coeff,
            None => {
                self.terms.insert(sym, coeff);
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &ItoExpr) -> Result<ItoExpr> {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone())?;
        }
        Ok(out)
    }

    /// Conjugate-transposed coefficients on adjoint symbols.
    pub fn adjoint(&self) -> ItoExpr {
        let terms = self.terms.iter().map(|(s, c)| (s.adjoint(), c.adjoint())).collect();
        ItoExpr { dim: self.dim, terms }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(numkit::max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// `(Σ A_s ds)(Σ B_t dt) = Σ A_s B_t (ds·dt)`, with the symbol products
    /// read from `table`.
    pub fn product(&self, other: &ItoExpr, table: &ItoTable<'_>) -> Result<ItoExpr> {
        if self.dim != other.dim {
            bail!(Dimension, "cannot multiply expressions of dimensions {} and {}", self.dim, other.dim);
        }
        let mut out = ItoExpr::zero(self.dim);
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                let st = table.product(*s, *t)?;
                let ab = a * b;
                for (u, k) in &st.terms {
                    out.add_term(*u, &ab * k[(0, 0)])?;
                }
            }
        }
        Ok(out)
    }
}

/// Which multiplication rule to apply to symbol pairs.
#[derive(Debug, Clone, Copy)]
pub enum ItoTable<'a> {
    Fock,
    Thermal(&'a ThermalRatios),
}

impl ItoTable<'_> {
    pub fn product(&self, s1: ItoSymbol, s2: ItoSymbol) -> Result<ItoExpr> {
        match self {
            ItoTable::Fock => fock_ito_product(s1, s2),
            ItoTable::Thermal(r) => thermal_ito_product(s1, s2, r),
        }
    }
}

/// `da^i_j · da^k_l = δ̂_{il} da^k_j`, where `δ̂` vanishes at `(0, 0)`.
pub fn fock_ito_product(s1: ItoSymbol, s2: ItoSymbol) -> Result<ItoExpr> {
    let as_fock = |s: ItoSymbol| match s.canonical() {
        ItoSymbol::Dt => Ok((0, 0)),
        ItoSymbol::Fock(i, j) => Ok((i, j)),
        other => bail!(Validation, "{other} is not a Fock-space differential"),
    };
    let ((i, j), (k, l)) = (as_fock(s1)?, as_fock(s2)?);
    if i == l && i != 0 {
        Ok(ItoExpr::scalar(ItoSymbol::Fock(k, j), C64::new(1.0, 0.0)))
    } else {
        Ok(ItoExpr::zero(1))
    }
}

/// Thermal rules: `dA^i_0 dA^0_i = r⁺_i dt` and `dA^0_i dA^i_0 = r⁻_i dt`,
/// everything else vanishes.
pub fn thermal_ito_product(s1: ItoSymbol, s2: ItoSymbol, ratios: &ThermalRatios) -> Result<ItoExpr> {
    for s in [s1, s2] {
        if !s.is_thermal() {
            bail!(Validation, "{s} is not a thermal differential");
        }
        if let ItoSymbol::APlus(i) | ItoSymbol::AMinus(i) = s {
            ratios.check_channel(i)?;
        }
    }
    let coeff = match (s1, s2) {
        (ItoSymbol::AMinus(i), ItoSymbol::APlus(j)) if i == j => ratios.r_plus(i),
        (ItoSymbol::APlus(i), ItoSymbol::AMinus(j)) if i == j => ratios.r_minus(i),
        _ => return Ok(ItoExpr::zero(1)),
    };
    Ok(ItoExpr::scalar(ItoSymbol::Dt, C64::new(coeff, 0.0)))
}

/// Per-channel Itô ratios `r⁺_i = β_0/(β_0−β_i)` and `r⁻_i = β_i/(β_0−β_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRatios {
    minus: Vec<f64>,
}

impl ThermalRatios {
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() < 2 {
            bail!(Validation, "need at least two weights, got {}", weights.len());
        }
        let b0 = weights[0];
        let mut minus = Vec::with_capacity(weights.len() - 1);
        for (i, &bi) in weights.iter().enumerate().skip(1) {
            if !(bi >= 0.0 && b0 > bi) {
                bail!(Validation, "degenerate channel {i}: β_0 = {b0}, β_{i} = {bi} (need β_0 > β_i ≥ 0)");
            }
            minus.push(bi / (b0 - bi));
        }
        Ok(ThermalRatios { minus })
    }

    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        model.bath().ensure_nondegenerate()?;
        Self::from_weights(model.weights())
    }

    /// The limit `β → ∞`: `r⁺ = 1`, `r⁻ = 0`.
    pub fn zero_temperature(channels: usize) -> Self {
        ThermalRatios { minus: alloc::vec![0.0; channels] }
    }

    pub fn channels(&self) -> usize {
        self.minus.len()
    }

    /// Built as `1 + r⁻`, so `r⁺ − r⁻ = 1` up to one rounding.
    pub fn r_plus(&self, i: usize) -> f64 {
        1.0 + self.minus[i - 1]
    }

    pub fn r_minus(&self, i: usize) -> f64 {
        self.minus[i - 1]
    }

    fn check_channel(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.channels() {
            bail!(Validation, "channel {i} out of range 1..={}", self.channels());
        }
        Ok(())
    }
}

/// Coefficient of `I` in `[A(f), A*(g)]` given the channel inner products
/// `⟨f_i, g_i⟩`, computed from the thermal table.
pub fn ccr_check(inner: &[C64], ratios: &ThermalRatios) -> Result<C64> {
    if inner.len() != ratios.channels() {
        bail!(Dimension, "{} inner products for {} channels", inner.len(), ratios.channels());
    }
    let mut total = C64::new(0.0, 0.0);
    for (k, z) in inner.iter().enumerate() {
        let i = k + 1;
        let am_ap = thermal_ito_product(ItoSymbol::AMinus(i), ItoSymbol::APlus(i), ratios)?;
        let ap_am = thermal_ito_product(ItoSymbol::APlus(i), ItoSymbol::AMinus(i), ratios)?;
        let dt = am_ap.coeff(ItoSymbol::Dt)[(0, 0)] - ap_am.coeff(ItoSymbol::Dt)[(0, 0)];
        total += z * dt;
    }
    Ok(total)
}

/// `(√r⁺_i, √r⁻_i)`: the amplitudes of the two Fock noises making up `A_i`.
pub fn thermal_to_doubled_fock(ratios: &ThermalRatios, i: usize) -> Result<(f64, f64)> {
    ratios.check_channel(i)?;
    Ok((ratios.r_plus(i).sqrt(), ratios.r_minus(i).sqrt()))
}

pub const HP_TOL: f64 = 1e-10;
pub const THERMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    ScatteringUnitary,
    HamiltonianHermitian,
    AnnihilationConsistent,
    MinusIsAdjoint,
    GeneratorSkew,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::ScatteringUnitary => "S^k_i = L^i_k + δ_ik I is not unitary",
            Condition::HamiltonianHermitian => "H = i(L^0_0 + ½ΣL_k*L_k) is not Hermitian",
            Condition::AnnihilationConsistent => "L^i_0 ≠ −Σ_k L_k* S^k_i",
            Condition::MinusIsAdjoint => "K^i_0 ≠ −(K^0_i)*",
            Condition::GeneratorSkew => "K + K* ≠ 0",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub condition: Condition,
    pub residual: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityReport {
    pub checks: Vec<Check>,
}

impl UnitarityReport {
    pub fn unitary(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

fn common_dim<'a>(ms: impl IntoIterator<Item = &'a CMatrix>) -> Result<usize> {
    let mut dim = None;
    for m in ms {
        let n = numkit::ensure_square(m, "coefficient")?;
        match dim {
            None => dim = Some(n),
            Some(d) if d != n => bail!(Dimension, "coefficients of sizes {d} and {n} in one table"),
            _ => {}
        }
    }
    dim.ok_or_else(|| crate::Error::Validation("empty coefficient table".into()))
}

/// Unitarity test for `dU = Σ L^i_j U da^i_j`, with `l[i][j] = L^i_j`.
///
/// Under the table `da^i_j da^k_l = δ̂_{il} da^k_j` the scattering matrix is
/// read as `S^k_i = L^i_k + δ_{ik}`; with this reading the three conditions
/// are exactly `d(U*U) = d(UU*) = 0`.
pub fn hp_unitarity(l: &[Vec<CMatrix>]) -> Result<UnitarityReport> {
    let size = l.len();
    if size < 1 || l.iter().any(|row| row.len() != size) {
        bail!(Dimension, "coefficient table must be square with at least one row");
    }
    let d = common_dim(l.iter().flatten())?;
    let n = size - 1;

    let mut s = zeros(n * d, n * d);
    for i in 1..=n {
        for k in 1..=n {
            let mut block = l[i][k].clone();
            if i == k {
                block += identity(d);
            }
            s.view_mut(((k - 1) * d, (i - 1) * d), (d, d)).copy_from(&block);
        }
    }
    let s_defect = if n == 0 {
        0.0
    } else {
        let id = identity(n * d);
        numkit::max_abs_diff(&(&s * s.adjoint()), &id).max(numkit::max_abs_diff(&(s.adjoint() * &s), &id))
    };

    let mut h = l[0][0].clone();
    for k in 1..=n {
        h += (l[0][k].adjoint() * &l[0][k]).scale(0.5);
    }
    let h = h * C64::new(0.0, 1.0);
    let h_defect = numkit::hermiticity_defect(&h);

    let mut a_defect: f64 = 0.0;
    for i in 1..=n {
        let mut expect = zeros(d, d);
        for k in 1..=n {
            expect -= l[0][k].adjoint() * s.view(((k - 1) * d, (i - 1) * d), (d, d));
        }
        a_defect = a_defect.max(numkit::max_abs_diff(&l[i][0], &expect));
    }

    Ok(UnitarityReport {
        checks: alloc::vec![
            Check { condition: Condition::ScatteringUnitary, residual: s_defect, tol: HP_TOL },
            Check { condition: Condition::HamiltonianHermitian, residual: h_defect, tol: HP_TOL },
            Check { condition: Condition::AnnihilationConsistent, residual: a_defect, tol: HP_TOL },
        ],
    })
}

/// Unitarity test for `dU = K00 U dt + Σ_i (K⁺_i U dA^0_i + K⁻_i U dA^i_0)`.
pub fn thermal_unitarity(
    k00: &CMatrix,
    kplus: &[CMatrix],
    kminus: &[CMatrix],
    ratios: &ThermalRatios,
) -> Result<UnitarityReport> {
    let n = ratios.channels();
    if kplus.len() != n || kminus.len() != n {
        bail!(Dimension, "{} / {} noise coefficients for {n} channels", kplus.len(), kminus.len());
    }
    let d = common_dim(core::iter::once(k00).chain(kplus).chain(kminus))?;
    let mut adj_defect: f64 = 0.0;
    let mut k = k00.clone();
    for i in 1..=n {
        let (p, m) = (&kplus[i - 1], &kminus[i - 1]);
        adj_defect = adj_defect.max(numkit::max_abs(&(m + p.adjoint())));
        k += (p.adjoint() * p).scale(0.5 * ratios.r_plus(i)) + (p * p.adjoint()).scale(0.5 * ratios.r_minus(i));
    }
    debug_assert_eq!(k.nrows(), d);
    let skew_defect = numkit::max_abs(&(&k + k.adjoint()));
    Ok(UnitarityReport {
        checks: alloc::vec![
            Check { condition: Condition::MinusIsAdjoint, residual: adj_defect, tol: THERMAL_TOL },
            Check { condition: Condition::GeneratorSkew, residual: skew_defect, tol: THERMAL_TOL },
        ],
    })
}

/// Coefficients `(K00, K⁺, K⁻)` of the unitary family
/// `K00 = −iH − ½Σ(r⁺ W*W + r⁻ WW*)`, `K⁺_i = W_i`, `K⁻_i = −W_i*`.
pub fn unitary_thermal_coefficients(
    h: &CMatrix,
    w: &[CMatrix],
    ratios: &ThermalRatios,
) -> Result<(CMatrix, Vec<CMatrix>, Vec<CMatrix>)> {
    if w.len() != ratios.channels() {
        bail!(Dimension, "{} noise coefficients for {} channels", w.len(), ratios.channels());
    }
    common_dim(core::iter::once(h).chain(w))?;
    let mut k00 = h * C64::new(0.0, -1.0);
    for (k, wi) in w.iter().enumerate() {
        let i = k + 1;
        k00 -= (wi.adjoint() * wi).scale(0.5 * ratios.r_plus(i)) + (wi * wi.adjoint()).scale(0.5 * ratios.r_minus(i));
    }
    Ok((k00, w.to_vec(), w.iter().map(|x| -x.adjoint()).collect()))
}

/// Zero-temperature table with `S = I`: `W_i` on `da^0_i`, `−W_i*` on `da^i_0`
/// and `−iH − ½ΣW_i*W_i` on `dt`.
pub fn fock_table_without_scattering(h: &CMatrix, w: &[CMatrix]) -> Result<Vec<Vec<CMatrix>>> {
    let d = common_dim(core::iter::once(h).chain(w))?;
    let n = w.len();
    let mut l = alloc::vec![alloc::vec![zeros(d, d); n + 1]; n + 1];
    l[0][0] = h * C64::new(0.0, -1.0);
    for (k, wi) in w.iter().enumerate() {
        l[0][0] -= (wi.adjoint() * wi).scale(0.5);
        l[0][k + 1] = wi.clone();
        l[k + 1][0] = -wi.adjoint();
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VacuumVariance {
    pub value: f64,
    /// `|(β_0+β_i)/(β_0−β_i) − coth(β(γ_i−γ_0)/2)|` per channel.
    pub residuals: Vec<f64>,
}

/// `⟨Ω, W(f) Ω⟩ = exp(−¼ Σ_i coth(β(γ_i−γ_0)/2) ‖f_i‖²)`, evaluated through
/// the weight ratios of a Gibbs bath.
pub fn weyl_vacuum_variance(model: &ModelSpec, norms: &[f64]) -> Result<VacuumVariance> {
    let bath = model.bath();
    let Some(beta) = bath.inverse_temperature() else {
        bail!(Validation, "vacuum variance needs a Gibbs bath with known β");
    };
    if norms.len() != bath.excited_levels() {
        bail!(Dimension, "{} channel norms for {} channels", norms.len(), bath.excited_levels());
    }
    if norms.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        bail!(Validation, "channel norms must be finite and non-negative");
    }
    let ratios = ThermalRatios::from_model(model)?;
    let gamma = bath.gamma();
    let mut exponent = 0.0;
    let mut residuals = Vec::with_capacity(norms.len());
    for (k, &f2) in norms.iter().enumerate() {
        let i = k + 1;
        let ratio = ratios.r_plus(i) + ratios.r_minus(i);
        let coth = 1.0 / Float::tanh(beta * (gamma[i] - gamma[0]) / 2.0);
        residuals.push((ratio - coth).abs());
        exponent += ratio * f2;
    }
    Ok(VacuumVariance { value: Float::exp(-0.25 * exponent), residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, SystemSpec};
    use crate::numkit::c;
    use crate::testutil::*;
    use alloc::vec;
    use rand::Rng;

    fn one() -> C64 {
        c(1.0, 0.0)
    }

    fn all_fock(n: usize) -> Vec<ItoSymbol> {
        let mut v = vec![ItoSymbol::Dt];
        for i in 0..=n {
            for j in 0..=n {
                if (i, j) != (0, 0) {
                    v.push(ItoSymbol::Fock(i, j));
                }
            }
        }
        v
    }

    #[test]
    fn fock_table_examples() {
        let p = fock_ito_product(ItoSymbol::Fock(1, 0), ItoSymbol::Fock(0, 1)).unwrap();
        assert_eq!(p, ItoExpr::scalar(ItoSymbol::Dt, one()));
        assert!(fock_ito_product(ItoSymbol::Fock(0, 1), ItoSymbol::Fock(0, 1)).unwrap().is_zero(0.0));
        for s in all_fock(2) {
            assert!(fock_ito_product(ItoSymbol::Dt, s).unwrap().is_zero(0.0));
            assert!(fock_ito_product(s, ItoSymbol::Dt).unwrap().is_zero(0.0));
            assert!(fock_ito_product(ItoSymbol::Fock(0, 0), s).unwrap().is_zero(0.0));
        }
        assert_eq!(
            fock_ito_product(ItoSymbol::Fock(2, 1), ItoSymbol::Fock(1, 2)).unwrap(),
            ItoExpr::scalar(ItoSymbol::Fock(1, 1), one())
        );
        assert!(fock_ito_product(ItoSymbol::APlus(1), ItoSymbol::Dt).is_err());
    }

    #[test]
    fn fock_table_is_associative() {
        let syms = all_fock(2);
        let table = ItoTable::Fock;
        for &a in &syms {
            for &b in &syms {
                for &cc in &syms {
                    let (x, y, z) = (
                        ItoExpr::scalar(a, one()),
                        ItoExpr::scalar(b, one()),
                        ItoExpr::scalar(cc, one()),
                    );
                    let left = x.product(&y, &table).unwrap().product(&z, &table).unwrap();
                    let right = x.product(&y.product(&z, &table).unwrap(), &table).unwrap();
                    assert_eq!(left.max_abs(), right.max_abs());
                    assert!(left.add(&right.adjoint().adjoint().scaled(-1.0)).unwrap().is_zero(0.0));
                }
            }
        }
    }

    impl ItoExpr {
        fn scaled(&self, x: f64) -> ItoExpr {
            let terms = self.terms.iter().map(|(s, m)| (*s, m.scale(x))).collect();
            ItoExpr { dim: self.dim, terms }
        }
    }

    #[test]
    fn thermal_table_examples() {
        let r = ThermalRatios::from_weights(&[0.6, 0.3, 0.1]).unwrap();
        let dt = |e: ItoExpr| e.coeff(ItoSymbol::Dt)[(0, 0)].re;
        let p = thermal_ito_product(ItoSymbol::AMinus(1), ItoSymbol::APlus(1), &r).unwrap();
        assert!((dt(p) - 0.6 / 0.3).abs() < 1e-15);
        let p = thermal_ito_product(ItoSymbol::APlus(1), ItoSymbol::AMinus(1), &r).unwrap();
        assert!((dt(p) - 0.3 / 0.3).abs() < 1e-15);
        assert!(thermal_ito_product(ItoSymbol::APlus(1), ItoSymbol::APlus(2), &r).unwrap().is_zero(0.0));
        assert!(thermal_ito_product(ItoSymbol::AMinus(1), ItoSymbol::APlus(2), &r).unwrap().is_zero(0.0));
        assert!(thermal_ito_product(ItoSymbol::Dt, ItoSymbol::APlus(2), &r).unwrap().is_zero(0.0));
        assert!(thermal_ito_product(ItoSymbol::APlus(3), ItoSymbol::AMinus(3), &r).is_err());
        assert!(thermal_ito_product(ItoSymbol::Fock(1, 0), ItoSymbol::APlus(1), &r).is_err());
        assert!(ThermalRatios::from_weights(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn thermal_reduces_to_fock_at_zero_temperature() {
        let r = ThermalRatios::zero_temperature(2);
        let to_fock = |s: ItoSymbol| match s {
            ItoSymbol::APlus(i) => ItoSymbol::Fock(0, i),
            ItoSymbol::AMinus(i) => ItoSymbol::Fock(i, 0),
            s => s,
        };
        let syms = [1, 2].iter().flat_map(|&i| [ItoSymbol::APlus(i), ItoSymbol::AMinus(i)]).collect::<Vec<_>>();
        for &a in &syms {
            for &b in &syms {
                let th = thermal_ito_product(a, b, &r).unwrap();
                let fk = fock_ito_product(to_fock(a), to_fock(b)).unwrap();
                assert_eq!(th.coeff(ItoSymbol::Dt), fk.coeff(ItoSymbol::Dt));
                assert!(fk.terms().all(|(s, _)| *s == ItoSymbol::Dt));
            }
        }
    }

    #[test]
    fn ccr_and_doubled_fock() {
        let r = ThermalRatios::from_weights(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(ccr_check(&[one()], &r).unwrap(), one());
        assert_eq!(ccr_check(&[c(0.0, 0.0)], &r).unwrap(), c(0.0, 0.0));
        let (a, b) = thermal_to_doubled_fock(&r, 1).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        assert_eq!(thermal_to_doubled_fock(&ThermalRatios::zero_temperature(1), 1).unwrap(), (1.0, 0.0));
        assert!(thermal_to_doubled_fock(&r, 2).is_err());

        let mut g = rng(401);
        for _ in 0..50 {
            let w = random_weights(&mut g, 4);
            let r = ThermalRatios::from_weights(&w).unwrap();
            let inner: Vec<C64> = (0..3).map(|_| c(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0))).collect();
            let sum: C64 = inner.iter().sum();
            assert!((ccr_check(&inner, &r).unwrap() - sum).norm() <= 1e-15);
            for i in 1..=3 {
                assert!((r.r_plus(i) - r.r_minus(i) - 1.0).abs() <= 1e-15 * r.r_plus(i));
                assert!(r.r_plus(i) > 1.0 && r.r_minus(i) > 0.0);
            }
        }
    }

    fn thermal_family(h: &CMatrix, w: &[CMatrix], r: &ThermalRatios) -> (CMatrix, Vec<CMatrix>, Vec<CMatrix>) {
        unitary_thermal_coefficients(h, w, r).unwrap()
    }

    #[test]
    fn thermal_unitarity_accepts_the_family() {
        let mut g = rng(402);
        let mut accepted = 0;
        for _ in 0..100 {
            let r = ThermalRatios::from_weights(&random_weights(&mut g, 3)).unwrap();
            let h = random_hermitian(&mut g, 3);
            let w: Vec<CMatrix> = (0..2).map(|_| random_matrix(&mut g, 3, 3)).collect();
            let (k00, kp, km) = thermal_family(&h, &w, &r);
            if thermal_unitarity(&k00, &kp, &km, &r).unwrap().unitary() {
                accepted += 1;
            }
            let bumped = &k00 + identity(3).scale(1e-3);
            let rep = thermal_unitarity(&bumped, &kp, &km, &r).unwrap();
            assert!(!rep.unitary());
            assert_eq!(rep.failures().next().unwrap().condition, Condition::GeneratorSkew);
        }
        assert_eq!(accepted, 100);

        let r = ThermalRatios::zero_temperature(1);
        let z = zeros(2, 2);
        assert!(thermal_unitarity(&z, core::slice::from_ref(&z), core::slice::from_ref(&z), &r).unwrap().unitary());
        assert!(!thermal_unitarity(&identity(2), core::slice::from_ref(&z), core::slice::from_ref(&z), &r).unwrap().unitary());
    }

    #[test]
    fn thermal_family_is_unitary_symbolically() {
        // d(U*U) = dU* + dU + dU*·dU and d(UU*) = dU + dU* + dU·dU* at U = I
        let mut g = rng(403);
        let r = ThermalRatios::from_weights(&random_weights(&mut g, 3)).unwrap();
        let h = random_hermitian(&mut g, 2);
        let w: Vec<CMatrix> = (0..2).map(|_| random_matrix(&mut g, 2, 2)).collect();
        let (k00, kp, km) = thermal_family(&h, &w, &r);
        let mut du = ItoExpr::term(ItoSymbol::Dt, k00).unwrap();
        for i in 1..=2 {
            du.add_term(ItoSymbol::APlus(i), kp[i - 1].clone()).unwrap();
            du.add_term(ItoSymbol::AMinus(i), km[i - 1].clone()).unwrap();
        }
        let table = ItoTable::Thermal(&r);
        let dus = du.adjoint();
        let uu = dus.add(&du).unwrap().add(&dus.product(&du, &table).unwrap()).unwrap();
        assert!(uu.is_zero(1e-12), "{}", uu.max_abs());
        let uu2 = du.add(&dus).unwrap().add(&du.product(&dus, &table).unwrap()).unwrap();
        assert!(uu2.is_zero(1e-12), "{}", uu2.max_abs());
    }

    fn zero_temp_table(h: &CMatrix, w: &[CMatrix]) -> Vec<Vec<CMatrix>> {
        fock_table_without_scattering(h, w).unwrap()
    }

    #[test]
    fn hp_unitarity_examples() {
        let z = vec![vec![zeros(2, 2); 3]; 3];
        assert!(hp_unitarity(&z).unwrap().unitary());

        let mut g = rng(404);
        let h = random_hermitian(&mut g, 2);
        let w: Vec<CMatrix> = (0..2).map(|_| random_matrix(&mut g, 2, 2)).collect();
        assert!(hp_unitarity(&zero_temp_table(&h, &w)).unwrap().unitary());

        let mut bad = z.clone();
        bad[0][0] = identity(2);
        let rep = hp_unitarity(&bad).unwrap();
        assert!(!rep.unitary());
        assert_eq!(rep.failures().map(|c| c.condition).collect::<Vec<_>>(), vec![Condition::HamiltonianHermitian]);

        let mut bad = zero_temp_table(&h, &w);
        bad[1][1] = identity(2);
        let failed: Vec<_> = hp_unitarity(&bad).unwrap().failures().map(|c| c.condition).collect();
        assert!(failed.contains(&Condition::ScatteringUnitary));
    }

    #[test]
    fn hp_with_scattering_is_unitary_symbolically() {
        let mut g = rng(405);
        let (d, n) = (2, 2);
        let h = random_hermitian(&mut g, d);
        let lk: Vec<CMatrix> = (0..n).map(|_| random_matrix(&mut g, d, d)).collect();
        // a random unitary S from the exponential of a skew matrix
        let s = numkit::mat_exp(&random_hermitian(&mut g, n * d).map(|z| z * c(0.0, 1.0))).unwrap();
        let block = |i: usize, j: usize| s.view(((i - 1) * d, (j - 1) * d), (d, d)).into_owned();
        let mut l = vec![vec![zeros(d, d); n + 1]; n + 1];
        l[0][0] = &h * c(0.0, -1.0);
        for k in 1..=n {
            l[0][0] -= (lk[k - 1].adjoint() * &lk[k - 1]).scale(0.5);
            l[0][k] = lk[k - 1].clone();
        }
        for i in 1..=n {
            for k in 1..=n {
                l[i][0] -= lk[k - 1].adjoint() * block(k, i);
            }
            for j in 1..=n {
                l[i][j] = block(j, i) - if i == j { identity(d) } else { zeros(d, d) };
            }
        }
        assert!(hp_unitarity(&l).unwrap().unitary());
        let uu = {
            let mut x = ItoExpr::zero(d);
            for i in 0..=n {
                for j in 0..=n {
                    x.add_term(ItoSymbol::Fock(i, j), l[i][j].clone()).unwrap();
                }
            }
            x.add(&x.adjoint()).unwrap().add(&x.product(&x.adjoint(), &ItoTable::Fock).unwrap()).unwrap()
        };
        assert!(uu.is_zero(1e-12), "{}", uu.max_abs());

        let mut du = ItoExpr::zero(d);
        for i in 0..=n {
            for j in 0..=n {
                du.add_term(ItoSymbol::Fock(i, j), l[i][j].clone()).unwrap();
            }
        }
        let dus = du.adjoint();
        let uu = dus.add(&du).unwrap().add(&dus.product(&du, &ItoTable::Fock).unwrap()).unwrap();
        assert!(uu.is_zero(1e-12), "{}", uu.max_abs());

        // the untransposed reading fails as soon as S has off-diagonal blocks
        let mut wrong = l.clone();
        for i in 1..=n {
            for j in 1..=n {
                wrong[i][j] = l[j][i].clone();
            }
        }
        assert!(!hp_unitarity(&wrong).unwrap().unitary());
    }

    #[test]
    fn hp_and_thermal_agree_at_zero_temperature() {
        let mut g = rng(406);
        let r = ThermalRatios::zero_temperature(2);
        for trial in 0..20 {
            let h = random_hermitian(&mut g, 2);
            let w: Vec<CMatrix> = (0..2).map(|_| random_matrix(&mut g, 2, 2)).collect();
            let (mut k00, kp, km) = thermal_family(&h, &w, &r);
            if trial % 2 == 1 {
                k00 += identity(2).scale(1e-3);
            }
            let mut l = vec![vec![zeros(2, 2); 3]; 3];
            l[0][0] = k00.clone();
            for i in 1..=2 {
                l[0][i] = kp[i - 1].clone();
                l[i][0] = km[i - 1].clone();
            }
            let hp = hp_unitarity(&l).unwrap().unitary();
            let th = thermal_unitarity(&k00, &kp, &km, &r).unwrap().unitary();
            assert_eq!(hp, th);
            assert_eq!(hp, trial % 2 == 0);
        }
    }

    fn gibbs_model(gamma: Vec<f64>, beta: f64) -> ModelSpec {
        let n = gamma.len() - 1;
        let sys = SystemSpec::new(zeros(1, 1), vec![zeros(1, 1); n]).unwrap();
        ModelSpec::new(sys, BathSpec::gibbs(gamma, beta).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_variance_examples() {
        let cold = weyl_vacuum_variance(&gibbs_model(vec![0.0, 1.0], 50.0), &[2.0]).unwrap();
        assert!((cold.value - (-0.5f64).exp()).abs() < 1e-15);

        let m = gibbs_model(vec![0.0, 3f64.ln()], 1.0);
        let r = ThermalRatios::from_model(&m).unwrap();
        assert!((r.r_plus(1) + r.r_minus(1) - 2.0).abs() < 1e-14);
        let v = weyl_vacuum_variance(&m, &[1.0]).unwrap();
        assert!((v.value - (-0.5f64).exp()).abs() < 1e-14);

        for beta in [0.1, 1.0, 10.0] {
            for gap in [0.5, 1.0, 2.0] {
                let v = weyl_vacuum_variance(&gibbs_model(vec![0.3, 0.3 + gap, 0.3 + 2.0 * gap], beta), &[1.0, 0.5]).unwrap();
                assert!(v.residuals.iter().all(|r| *r <= 1e-12), "{:?}", v.residuals);
            }
        }
        assert!(weyl_vacuum_variance(&gibbs_model(vec![0.0, 1.0], 0.0), &[1.0]).is_err());
        let weighted = ModelSpec::new(
            SystemSpec::new(zeros(1, 1), vec![zeros(1, 1)]).unwrap(),
            BathSpec::with_weights(vec![0.0, 1.0], vec![0.7, 0.3]).unwrap(),
        )
        .unwrap();
        assert!(weyl_vacuum_variance(&weighted, &[1.0]).is_err());
    }

    #[test]
    fn vacuum_variance_is_monotone() {
        let norms = [0.0, 0.5, 1.0, 2.0, 4.0];
        for beta in [0.5, 2.0] {
            let m = gibbs_model(vec![0.0, 1.0, 1.5], beta);
            let vals: Vec<f64> = norms.iter().map(|&f| weyl_vacuum_variance(&m, &[f, 1.0]).unwrap().value).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
            let vals: Vec<f64> = norms.iter().map(|&f| weyl_vacuum_variance(&m, &[1.0, f]).unwrap().value).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
        }
        let gaps = [0.25, 0.5, 1.0, 2.0, 4.0];
        let vals: Vec<f64> =
            gaps.iter().map(|&g| weyl_vacuum_variance(&gibbs_model(vec![0.0, g], 1.0), &[1.0]).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }
}
