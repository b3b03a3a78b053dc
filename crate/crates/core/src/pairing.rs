//! Higher arithmetic Chow groups of Spec F and the pairings ( , )_{p,q},
//! reduced modulo the image of the Beilinson regulator.
//!
//! Pairings are computed at the level of cycles and field elements; they do
//! not descend to Chow classes.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::cubical::{standard, BoxPoint, CycleError, FormalCycle};
use crate::deligne::DeligneClass;
use crate::field::{FieldElement, FieldSpec, GaussianPrime, DEFAULT_FACTOR_BOUND};
use crate::k2::{decompose, default_primes, K2Error, SteinbergDecomposition};
use crate::polylog::{bloch_wigner, zeta3, PrecisionPolicy};
use crate::quadrature::QuadParams;
use crate::regulator::{
    wang_vanishing_check, regulator, regulator_goncharov_weight3, VanishingReport, RegulatorError, RegulatorOptions,
};
use crate::mp;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PairingError {
    #[error(transparent)]
    K2(#[from] K2Error),
    #[error(transparent)]
    Regulator(#[from] RegulatorError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error("inadmissible cycle: {0}")]
    Inadmissible(String),
}

/// A group appearing in the case analysis for Spec F.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Zero,
    /// ℚ^rank, with the rank formula as printed (e.g. "r1+r2").
    Rational { rank: usize, formula: &'static str },
    /// F×⊗ℚ.
    UnitsTensorQ,
    /// ℝ^rank (untwisted).
    Real { rank: usize, formula: &'static str },
    /// ℝ(t)^rank.
    RealTwist { twist: usize, rank: usize, formula: &'static str },
    /// CH^p(F, n)_ℚ, given by the inner descriptor.
    Chow { p: usize, n: usize, inner: Box<Group> },
    /// H¹_𝔇(F, ℝ(p)) / im(ρ_Be).
    DeligneModRegulator { p: usize, rank: usize },
    /// 0 → 𝔇_TW^0(F, p) → · → CH^p(F, n)_ℚ → 0.
    Extension { p: usize, n: usize, quotient: Box<Group> },
    /// Torsion.
    Torsion,
    /// ker(log|·|: F× → ℝ^{r1+r2}).
    LogKernel,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Zero => write!(f, "0"),
            Group::Rational { formula, .. } if formula.is_empty() => write!(f, "Q"),
            Group::Rational { formula, .. } => write!(f, "Q^({formula})"),
            Group::UnitsTensorQ => write!(f, "F^x (x) Q"),
            Group::Real { formula, .. } => write!(f, "R^({formula})"),
            Group::RealTwist { twist, formula, .. } => write!(f, "R({twist})^({formula})"),
            Group::Chow { p, n, inner } => write!(f, "CH^{p}(F,{n})_Q = {inner}"),
            Group::DeligneModRegulator { p, .. } => write!(f, "H^1_D(F,R({p}))/im(rho_Be)"),
            Group::Extension { p, n, quotient } => write!(f, "0 -> D_TW^0(F,{p}) -> . -> CH^{p}(F,{n})_Q = {quotient} -> 0"),
            Group::Torsion => write!(f, "torsion"),
            Group::LogKernel => write!(f, "ker(log|.|)"),
        }
    }
}

impl Group {
    /// ℚ- or ℝ-dimension when finite.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Group::Zero | Group::Torsion => Some(0),
            Group::Rational { rank, .. } | Group::Real { rank, .. } | Group::RealTwist { rank, .. } => Some(*rank),
            Group::DeligneModRegulator { .. } => None,
            Group::Chow { inner, .. } => inner.rank(),
            _ => None,
        }
    }
}

impl Serialize for Group {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("descriptor", &self.to_string())?;
        m.serialize_entry("exact", &true)?;
        m.serialize_entry("rank", &self.rank())?;
        m.end()
    }
}

/// CH^p, 𝔇ⁿ, ĈH^p with 𝔇 and 𝔇_TW, and the ^0 subgroups, for Spec F.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupShape {
    pub p: usize,
    pub n: usize,
    pub field: String,
    pub chow: Group,
    pub deligne: Group,
    pub arithmetic_d: Group,
    pub arithmetic_tw: Group,
    /// `None` where the case analysis says nothing.
    pub arithmetic_zero: Option<Group>,
}

fn chow(p: usize, n: usize, f: FieldSpec) -> Group {
    let (r1, r2) = (f.r1(), f.r2());
    if p == 0 && n == 0 {
        Group::Rational { rank: 1, formula: "" }
    } else if p == 1 && n == 1 {
        Group::UnitsTensorQ
    } else if 2 * p == n + 1 && p % 2 == 1 {
        Group::Rational { rank: r1 + r2, formula: "r1+r2" }
    } else if 2 * p == n + 1 {
        Group::Rational { rank: r2, formula: "r2" }
    } else {
        Group::Zero
    }
}

fn deligne(p: usize, n: usize, f: FieldSpec) -> Group {
    let (r1, r2) = (f.r1(), f.r2());
    if n == 0 && p == 0 {
        Group::Real { rank: r1 + r2, formula: "r1+r2" }
    } else if n == 1 && p % 2 == 1 {
        Group::RealTwist { twist: p - 1, rank: r1 + r2, formula: "r1+r2" }
    } else if n == 1 && p > 0 {
        Group::RealTwist { twist: p - 1, rank: r2, formula: "r2" }
    } else {
        Group::Zero
    }
}

fn d_rank(p: usize, f: FieldSpec) -> usize {
    deligne(p, 1, f).rank().unwrap_or(0)
}

pub fn group_shape(p: usize, n: usize, field: FieldSpec) -> GroupShape {
    let arithmetic_d = if p == 0 && n == 0 {
        Group::Chow { p: 0, n: 0, inner: Box::new(chow(0, 0, field)) }
    } else if p > 0 && 2 * p == n + 1 {
        Group::Chow { p, n, inner: Box::new(chow(p, n, field)) }
    } else if p > 0 && 2 * p == n + 2 {
        Group::DeligneModRegulator { p, rank: d_rank(p, field) }
    } else {
        Group::Zero
    };
    let arithmetic_tw = if p == 0 && n == 0 {
        Group::Rational { rank: 1, formula: "" }
    } else if p > 0 && n + 1 == 2 * p {
        Group::Extension { p, n, quotient: Box::new(chow(p, n, field)) }
    } else if p > 0 && n + 2 == 2 * p {
        Group::DeligneModRegulator { p, rank: d_rank(p, field) }
    } else {
        Group::Zero
    };
    let arithmetic_zero = if p == 0 && n == 0 {
        Some(Group::Zero)
    } else if p > 0 && n + 2 == 2 * p {
        Some(Group::DeligneModRegulator { p, rank: d_rank(p, field) })
    } else if p > 1 && n + 1 == 2 * p {
        Some(Group::Torsion)
    } else if p == 1 && n == 1 {
        Some(Group::LogKernel)
    } else {
        None
    };
    GroupShape {
        p,
        n,
        field: field.to_string(),
        chow: chow(p, n, field),
        deligne: deligne(p, n, field),
        arithmetic_d,
        arithmetic_tw,
        arithmetic_zero,
    }
}

/// Green datum of an arithmetic cycle over Spec F.
#[derive(Clone, Debug, PartialEq)]
pub enum Green {
    /// The zero Green current; then ω = 𝒫(Z).
    Zero,
    Class(DeligneClass),
}

/// A pair (Z, g̃_Z) with Z a normalized cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticCycle {
    pub cycle: FormalCycle,
    pub green: Green,
}

impl ArithmeticCycle {
    pub fn new(cycle: FormalCycle, green: Green) -> Result<Self, PairingError> {
        if !cycle.is_normalized()? {
            return Err(PairingError::Inadmissible("not normalized".into()));
        }
        if !cycle.boundary()?.without_degenerate().is_zero() {
            return Err(PairingError::Inadmissible("boundary is not zero".into()));
        }
        Ok(ArithmeticCycle { cycle, green })
    }

    /// ω(g_Z): with the zero Green current this is 𝒫(Z).
    pub fn omega(&self, opts: &RegulatorOptions) -> Result<DeligneClass, PairingError> {
        match &self.green {
            Green::Zero => Ok(regulator(&self.cycle, opts)?.class),
            Green::Class(c) => Ok(c.clone()),
        }
    }
}

/// (δZ′, −𝒫(Z′)).
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceShift {
    pub boundary: FormalCycle,
    pub green: DeligneClass,
    pub exact_zero: bool,
}

/// The arithmetic cycle (δZ′, −𝒫(Z′)) that is rationally equivalent to zero.
pub fn rational_equivalence_shift(z: &FormalCycle, opts: &RegulatorOptions) -> Result<EquivalenceShift, PairingError> {
    if !z.is_normalized()? {
        return Err(PairingError::Inadmissible("pre-cycle is not normalized".into()));
    }
    let nd = z.without_degenerate();
    if nd.is_zero() {
        return Ok(EquivalenceShift {
            boundary: FormalCycle::zero(z.dim() - 1, z.codim()),
            green: DeligneClass::zero(z.codim(), 2),
            exact_zero: true,
        });
    }
    let boundary = nd.boundary()?.without_degenerate();
    let r = regulator(&nd, opts)?;
    Ok(EquivalenceShift {
        boundary,
        green: r.class.scale(-1.0),
        exact_zero: r.provenance == crate::regulator::Provenance::ExactZero,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingConfig {
    pub factor_bound: u64,
    pub height: i64,
    /// Defaults to 1 + i and the primes of α and β.
    pub primes: Option<Vec<GaussianPrime>>,
    pub denom_bound: i64,
    pub policy: PrecisionPolicy,
    pub quad: QuadParams,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig {
            factor_bound: DEFAULT_FACTOR_BOUND,
            height: 8,
            primes: None,
            denom_bound: 144,
            policy: PrecisionPolicy::with_bits(128),
            quad: QuadParams::default(),
        }
    }
}

/// q̂ per generator and the residue v − Σ q̂·g.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub q_hat: Vec<BigRational>,
    pub residue: DeligneClass,
}

impl Reduction {
    pub fn residue_norm(&self) -> f64 {
        self.residue.norm()
    }
}

/// Best rational with denominator ≤ bound; on ties the smaller denominator.
pub fn best_rational(x: f64, bound: i64) -> BigRational {
    let mut best = (f64::INFINITY, BigRational::zero());
    for d in 1..=bound.max(1) {
        let n = (x * d as f64).round();
        let e = (x - n / d as f64).abs();
        if e < best.0 {
            best = (e, BigRational::new(BigInt::from(n as i64), BigInt::from(d)));
        }
    }
    best.1
}

/// Least squares for the coefficients, then rational rounding.
pub fn reduce_mod_regulator(v: &DeligneClass, generators: &[DeligneClass], denom_bound: i64) -> Reduction {
    let k = generators.len();
    if k == 0 {
        return Reduction { q_hat: vec![], residue: v.clone() };
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gram = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = dot(&generators[i].values, &generators[j].values);
        }
        gram[i][k] = dot(&generators[i].values, &v.values);
    }
    for c in 0..k {
        let p = (c..k).max_by(|a, b| gram[*a][c].abs().total_cmp(&gram[*b][c].abs())).unwrap();
        gram.swap(c, p);
        let piv = gram[c][c];
        if piv == 0.0 {
            continue;
        }
        for r in 0..k {
            if r != c {
                let f = gram[r][c] / piv;
                for j in c..=k {
                    gram[r][j] -= f * gram[c][j];
                }
            }
        }
    }
    let q_hat: Vec<BigRational> = (0..k)
        .map(|i| if gram[i][i] == 0.0 { BigRational::zero() } else { best_rational(gram[i][k] / gram[i][i], denom_bound) })
        .collect();
    let mut residue = v.clone();
    for (g, q) in generators.iter().zip(&q_hat) {
        let qf = q.to_f64().unwrap();
        residue = residue.sub(&g.scale(qf)).expect("same twist");
    }
    Reduction { q_hat, residue }
}

/// The weight-2 generator for ℚ(i): scalar 𝓛₂(i)/(2π) in ℝ(1).
pub fn generator_weight2(policy: &PrecisionPolicy) -> DeligneClass {
    let z = &FieldElement::i().embed(policy.bits + policy.guard_bits)[0];
    let s = mp::to_f64(&bloch_wigner(z, policy)) / (2.0 * PI);
    DeligneClass::from_first(2, &[(s, s.abs() * f64::EPSILON)])
}

/// Σ c_γ·𝓛₂(σγ)/(2π) over the atoms of a decomposition.
pub fn dilog_value(atoms: &[(FieldElement, f64)], policy: &PrecisionPolicy) -> DeligneClass {
    let p = policy.bits + policy.guard_bits;
    let mut s = 0.0;
    let mut e = 0.0;
    for (g, c) in atoms {
        let d = mp::to_f64(&bloch_wigner(&g.embed(p)[0], policy));
        s += c * d / (2.0 * PI);
        e += (c * d).abs() * f64::EPSILON;
    }
    DeligneClass::from_first(2, &[(s, e + s.abs() * f64::EPSILON)])
}

/// Boundary identity δW = {i}×Z_i, checked term by term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCertificate {
    pub exact: bool,
    pub lhs: String,
    pub rhs: String,
    /// δW − {i}×Z_i when the identity fails.
    pub difference: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingResult {
    pub p: usize,
    pub q: usize,
    pub raw: DeligneClass,
    pub generators: Vec<DeligneClass>,
    pub reduction: Reduction,
    pub decomposition: Option<SteinbergDecomposition>,
    pub certificate: Option<BoundaryCertificate>,
    pub vanishing: Option<VanishingReport>,
    pub notes: Vec<String>,
}

/// (α, β)_{1,1} through a Steinberg decomposition of α∧β.
pub fn pair_11(alpha: &FieldElement, beta: &FieldElement, cfg: &PairingConfig) -> Result<PairingResult, PairingError> {
    let primes = match &cfg.primes {
        Some(p) => p.clone(),
        None => default_primes(alpha, beta, cfg.factor_bound)?,
    };
    let dec = decompose(alpha, beta, &primes, cfg.height, cfg.factor_bound)?;
    let atoms: Vec<(FieldElement, f64)> =
        dec.atoms.iter().map(|a| (a.gamma.clone(), a.coefficient.to_f64().unwrap())).collect();
    let raw = dilog_value(&atoms, &cfg.policy);
    let generators = vec![generator_weight2(&cfg.policy)];
    let reduction = reduce_mod_regulator(&raw, &generators, cfg.denom_bound);
    Ok(PairingResult {
        p: 1,
        q: 1,
        raw,
        generators,
        reduction,
        decomposition: Some(dec),
        certificate: None,
        vanishing: None,
        notes: vec![],
    })
}

/// Checks δ(4(C′_a − C″_a) − Ξ_a) against {a}×Z_a.
pub fn weight3_boundary_certificate(a: &FieldElement) -> Result<BoundaryCertificate, PairingError> {
    let lhs = standard::weight3_precycle(a).boundary()?.without_degenerate();
    let pt = FormalCycle::point(BoxPoint::from_elements(std::slice::from_ref(a))?);
    let rhs = pt.product(&standard::z_cycle(a))?.without_degenerate();
    let diff = lhs.sub(&rhs)?;
    Ok(BoundaryCertificate {
        exact: diff.is_zero(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        difference: diff.terms().map(|(g, m)| format!("{m}*{g}")).collect(),
    })
}

/// (i, Z_i)_{1,2} = −4·𝒫(C′_i − C″_i) = (2/π²)·𝓛₃(i).
pub fn pair_1_2_standard(cfg: &PairingConfig) -> Result<PairingResult, PairingError> {
    let i = FieldElement::i();
    let certificate = weight3_boundary_certificate(&i)?;
    let curve = standard::xi(&i);
    let factor = crate::regulator::split_product(&curve)
        .and_then(|parts| parts.into_iter().find(|(s, _)| s.len() == 2))
        .ok_or_else(|| PairingError::Inadmissible("Ξ_i is not a product".into()))?
        .1;
    let rep = wang_vanishing_check(&factor, &cfg.quad)?;
    let raw = regulator_goncharov_weight3(&i, 1, &cfg.policy)?.class.scale(-4.0);
    let mut notes = vec![format!("P(Xi_i) = 0 via the factor {factor}")];
    if !certificate.exact {
        notes.push("boundary identity does not hold term by term; see certificate.difference".into());
    }
    Ok(PairingResult {
        p: 1,
        q: 2,
        reduction: Reduction { q_hat: vec![], residue: raw.clone() },
        raw,
        generators: vec![],
        decomposition: None,
        certificate: Some(certificate),
        vanishing: Some(rep),
        notes,
    })
}

/// −(3/(16π²))·ζ(3).
pub fn weight3_reference(policy: &PrecisionPolicy) -> f64 {
    -3.0 * mp::to_f64(&zeta3(policy.bits + policy.guard_bits)) / (16.0 * PI * PI)
}

/// The worked-example combination −(1/2π)𝓛₂(−1−i) + (1/12π)𝓛₂((−1−i)⁶) + (1/2π)𝓛₂(2+3i).
pub fn worked_example_reference(policy: &PrecisionPolicy) -> DeligneClass {
    let m = FieldElement::from_ints(-1, -1);
    dilog_value(
        &[(m.clone(), -1.0), (m.pow(6).unwrap(), 1.0 / 6.0), (FieldElement::from_ints(2, 3), 1.0)],
        policy,
    )
}

/// Value of σ ↦ s·(2πi)^{p−1} at the first embedding.
pub fn first_value(c: &DeligneClass) -> Complex64 {
    c.complex_value(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElement {
        s.parse().unwrap()
    }

    #[test]
    fn shapes() {
        let g = FieldSpec::GAUSSIAN;
        assert_eq!(group_shape(2, 3, g).chow, Group::Rational { rank: 1, formula: "r2" });
        assert_eq!(group_shape(1, 1, g).chow, Group::UnitsTensorQ);
        assert_eq!(group_shape(3, 1, g).chow, Group::Zero);
        assert_eq!(group_shape(2, 2, g).arithmetic_tw, Group::DeligneModRegulator { p: 2, rank: 1 });
        assert_eq!(group_shape(1, 1, g).arithmetic_zero, Some(Group::LogKernel));
    }

    #[test]
    fn reduction_trivia() {
        let pol = PrecisionPolicy::with_bits(128);
        let g = generator_weight2(&pol);
        let r = reduce_mod_regulator(&g, &[g.clone()], 144);
        assert_eq!(r.q_hat[0], BigRational::from_integer(1.into()));
        assert!(r.residue_norm() == 0.0);
        let r = reduce_mod_regulator(&DeligneClass::zero(2, 2), &[g.clone()], 144);
        assert!(r.q_hat[0].is_zero() && r.residue_norm() == 0.0);
        assert_eq!(best_rational(0.5 + 1e-13, 144), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn steinberg_pairing_matches_closed_form() {
        let cfg = PairingConfig::default();
        for a in ["2+3*i", "1/2+1/2*i", "-3+i", "i", "5/3"] {
            let a = fe(a);
            let b = &FieldElement::one() - &a;
            let r = pair_11(&a, &b, &cfg).unwrap();
            let expect = dilog_value(&[(a.clone(), 1.0)], &cfg.policy);
            assert!(r.raw.sub(&expect).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn worked_example() {
        let cfg = PairingConfig::default();
        let r = pair_11(&fe("2+3*i"), &fe("1-2*i"), &cfg).unwrap();
        let d = r.raw.sub(&worked_example_reference(&cfg.policy)).unwrap();
        let red = reduce_mod_regulator(&d, &r.generators, 144);
        assert!(red.residue_norm() <= 1e-9, "raw {} residue {}", r.raw, red.residue);
    }

    #[test]
    fn weight3_value() {
        let cfg = PairingConfig::default();
        let r = pair_1_2_standard(&cfg).unwrap();
        assert!((r.raw.values[0] - weight3_reference(&cfg.policy)).abs() < 1e-10);
        let l = r.vanishing.unwrap();
        assert!(l.total <= 1e-6 && l.residue_defect <= 1e-6, "{l:?}");
    }

    #[test]
    fn shift_examples() {
        let opts = RegulatorOptions::default();
        let a = fe("2+3*i");
        let s = rational_equivalence_shift(&FormalCycle::param(standard::totaro(&a)), &opts).unwrap();
        assert_eq!(s.boundary, FormalCycle::point(standard::steinberg_point(&a)));
        let expect = dilog_value(&[(a, 1.0)], &opts.policy);
        assert!(s.green.sub(&expect).unwrap().norm() < 1e-12);
    }
}
