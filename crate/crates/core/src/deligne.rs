//! The dimension-zero Thom–Whitney Deligne complex: ε-polynomial
//! coefficients per complex embedding, with classes in ℝ(p−1).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

/// Coefficient ring for ε-polynomials.
pub trait Coef:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn div_i64(&self, v: i64) -> Self;
    fn conj(&self) -> Self;
}

impl Coef for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn div_i64(&self, v: i64) -> Self {
        self / v as f64
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

pub type ExactComplex = Complex<BigRational>;

impl Coef for ExactComplex {
    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(v.into()), BigRational::zero())
    }

    fn div_i64(&self, v: i64) -> Self {
        let d = BigRational::from_integer(v.into());
        Complex::new(&self.re / &d, &self.im / &d)
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

impl Coef for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }

    fn div_i64(&self, v: i64) -> Self {
        self / BigRational::from_integer(v.into())
    }

    fn conj(&self) -> Self {
        self.clone()
    }
}

/// Polynomial in ε, index = degree, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsPoly<T: Coef> {
    coeffs: Vec<T>,
}

impl<T: Coef> EpsPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = EpsPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        EpsPoly { coeffs: vec![] }
    }

    pub fn constant(c: T) -> Self {
        EpsPoly::new(vec![c])
    }

    /// ε itself.
    pub fn eps() -> Self {
        EpsPoly::new(vec![T::zero(), T::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, e: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * e.clone() + c.clone())
    }

    pub fn at_zero(&self) -> T {
        self.coeff(0)
    }

    pub fn at_one(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, c| a + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        EpsPoly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        EpsPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_i64(k as i64))
                .collect(),
        )
    }

    /// ∫₀¹ p(ε) dε.
    pub fn integral01(&self) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (k, c)| a + c.div_i64(k as i64 + 1))
    }

    pub fn conj(&self) -> Self {
        EpsPoly::new(self.coeffs.iter().map(Coef::conj).collect())
    }

    pub fn map<U: Coef>(&self, f: impl Fn(&T) -> U) -> EpsPoly<U> {
        EpsPoly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Coef> Add for &EpsPoly<T> {
    type Output = EpsPoly<T>;
    fn add(self, o: &EpsPoly<T>) -> EpsPoly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        EpsPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<T: Coef> Sub for &EpsPoly<T> {
    type Output = EpsPoly<T>;
    fn sub(self, o: &EpsPoly<T>) -> EpsPoly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        EpsPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<T: Coef> Mul for &EpsPoly<T> {
    type Output = EpsPoly<T>;
    fn mul(self, o: &EpsPoly<T>) -> EpsPoly<T> {
        if self.is_zero() || o.is_zero() {
            return EpsPoly::zero();
        }
        let mut r = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                r[i + j] = r[i + j].clone() + a.clone() * b.clone();
            }
        }
        EpsPoly::new(r)
    }
}

impl<T: Coef> Neg for &EpsPoly<T> {
    type Output = EpsPoly<T>;
    fn neg(self) -> EpsPoly<T> {
        EpsPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeligneError {
    #[error("expected an element of degree {expected}, got degree {got}")]
    Degree { expected: u8, got: u8 },
    #[error("twist mismatch: {0} vs {1}")]
    Twist(usize, usize),
    #[error("embedding count mismatch")]
    Embeddings,
}

/// An element of 𝔇_TW^n(F, p) for n ∈ {0, 1}: per embedding either g(ε)
/// (degree 0) or h(ε)·dε (degree 1). Degrees ≥ 2 vanish over Spec F.
#[derive(Clone, Debug, PartialEq)]
pub struct TWElement<T: Coef> {
    pub twist: usize,
    pub degree: u8,
    pub parts: Vec<EpsPoly<T>>,
}

impl<T: Coef> TWElement<T> {
    pub fn new(twist: usize, degree: u8, parts: Vec<EpsPoly<T>>) -> Self {
        TWElement { twist, degree, parts }
    }

    pub fn zero(twist: usize, degree: u8, embeddings: usize) -> Self {
        TWElement { twist, degree, parts: vec![EpsPoly::zero(); embeddings] }
    }

    pub fn unit(embeddings: usize) -> Self {
        TWElement { twist: 0, degree: 0, parts: vec![EpsPoly::constant(T::one()); embeddings] }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(EpsPoly::is_zero)
    }

    pub fn add(&self, o: &Self) -> Result<Self, DeligneError> {
        if self.twist != o.twist {
            return Err(DeligneError::Twist(self.twist, o.twist));
        }
        if self.degree != o.degree {
            return Err(DeligneError::Degree { expected: self.degree, got: o.degree });
        }
        if self.parts.len() != o.parts.len() {
            return Err(DeligneError::Embeddings);
        }
        let parts = self.parts.iter().zip(&o.parts).map(|(a, b)| a + b).collect();
        Ok(TWElement { twist: self.twist, degree: self.degree, parts })
    }

    pub fn scale(&self, s: &T) -> Self {
        TWElement { twist: self.twist, degree: self.degree, parts: self.parts.iter().map(|p| p.scale(s)).collect() }
    }

    /// Swaps conjugate embeddings and conjugates coefficients.
    pub fn f_infinity(&self) -> Self {
        let mut parts: Vec<EpsPoly<T>> = self.parts.iter().map(EpsPoly::conj).collect();
        for pair in parts.chunks_mut(2) {
            if pair.len() == 2 {
                pair.swap(0, 1);
            }
        }
        TWElement { twist: self.twist, degree: self.degree, parts }
    }

    pub fn fixed_part_check(&self) -> bool {
        self.f_infinity() == *self
    }
}

/// d(g) = g′(ε)dε; d of a degree-1 element is 0.
pub fn differential<T: Coef>(x: &TWElement<T>) -> TWElement<T> {
    match x.degree {
        0 => TWElement { twist: x.twist, degree: 1, parts: x.parts.iter().map(EpsPoly::derivative).collect() },
        _ => TWElement::zero(x.twist, 2, x.parts.len()),
    }
}

/// (g₁ + h₁dε)(g₂ + h₂dε) with dε∧dε = 0.
pub fn tw_product<T: Coef>(x: &TWElement<T>, y: &TWElement<T>) -> TWElement<T> {
    let twist = x.twist + y.twist;
    let degree = x.degree + y.degree;
    if degree >= 2 {
        return TWElement::zero(twist, 2, x.parts.len());
    }
    let parts = x.parts.iter().zip(&y.parts).map(|(a, b)| a * b).collect();
    TWElement { twist, degree, parts }
}

impl TWElement<Complex64> {
    /// Checks g(0) ∈ (2πi)^p ℝ and g(1) = 0 for p ≥ 1 (degree 0 only).
    pub fn boundary_conditions_hold(&self, tol: f64) -> bool {
        if self.degree != 0 {
            return true;
        }
        let unit = twist_unit(self.twist);
        self.parts.iter().all(|g| {
            let s = g.at_zero() / unit;
            let ok0 = s.im.abs() <= tol * (1.0 + s.norm());
            let ok1 = self.twist == 0 || g.at_one().norm() <= tol;
            ok0 && ok1
        })
    }
}

/// (2πi)^k.
pub fn twist_unit(k: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI).powu(k as u32)
}

/// π_k(x) = ½(x + (−1)^k x̄).
pub fn pi_projection(x: Complex64, k: usize) -> Complex64 {
    if k % 2 == 0 {
        Complex64::new(x.re, 0.0)
    } else {
        Complex64::new(0.0, x.im)
    }
}

/// A class in H¹_𝔇(F, ℝ(p)) ≅ ⊕_σ ℝ(p−1): per embedding a real scalar s_σ
/// with value s_σ·(2πi)^{p−1}, plus an error estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeligneClass {
    pub twist: usize,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl DeligneClass {
    pub fn zero(twist: usize, embeddings: usize) -> Self {
        DeligneClass { twist, values: vec![0.0; embeddings], errors: vec![0.0; embeddings] }
    }

    /// Builds a class from the scalar at the first embedding of each
    /// conjugate pair; the conjugate carries (−1)^{p−1} times it.
    pub fn from_first(twist: usize, pairs: &[(f64, f64)]) -> Self {
        let sign = if twist % 2 == 1 { 1.0 } else { -1.0 };
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for (v, e) in pairs {
            values.extend([*v, sign * v]);
            errors.extend([*e, *e]);
        }
        DeligneClass { twist, values, errors }
    }

    pub fn complex_value(&self, emb: usize) -> Complex64 {
        self.values[emb] * twist_unit(self.twist.saturating_sub(1))
    }

    pub fn add(&self, o: &Self) -> Result<Self, DeligneError> {
        if self.twist != o.twist {
            return Err(DeligneError::Twist(self.twist, o.twist));
        }
        Ok(DeligneClass {
            twist: self.twist,
            values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect(),
            errors: self.errors.iter().zip(&o.errors).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        DeligneClass {
            twist: self.twist,
            values: self.values.iter().map(|v| v * s).collect(),
            errors: self.errors.iter().map(|e| e * s.abs()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self, DeligneError> {
        self.add(&o.scale(-1.0))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }

    /// Conjugate embeddings carry conjugate values.
    pub fn is_equivariant(&self, tol: f64) -> bool {
        self.values.chunks(2).all(|p| {
            p.len() < 2 || {
                let a = p[0] * twist_unit(self.twist.saturating_sub(1));
                let b = p[1] * twist_unit(self.twist.saturating_sub(1));
                (a.conj() - b).norm() <= tol * (1.0 + a.norm())
            }
        })
    }
}

impl fmt::Display for DeligneClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| format!("{v:.15e}")).collect();
        write!(f, "[{}]·(2πi)^{}", parts.join(", "), self.twist.saturating_sub(1))
    }
}

/// Class of a degree-1 element: per embedding ∫₀¹h(ε)dε, projected by
/// π_{p−1} and divided by (2πi)^{p−1}.
pub fn class_of(x: &TWElement<Complex64>, p: usize, errors: &[f64]) -> Result<DeligneClass, DeligneError> {
    if x.degree != 1 {
        return Err(DeligneError::Degree { expected: 1, got: x.degree });
    }
    let k = p.saturating_sub(1);
    let unit = twist_unit(k);
    let values = x
        .parts
        .iter()
        .map(|h| {
            let s = pi_projection(h.integral01(), k) / unit;
            s.re
        })
        .collect();
    let errors = if errors.len() == x.parts.len() { errors.to_vec() } else { vec![0.0; x.parts.len()] };
    Ok(DeligneClass { twist: p, values, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ec(a: (i64, i64), b: (i64, i64)) -> ExactComplex {
        Complex::new(q(a.0, a.1), q(b.0, b.1))
    }

    #[test]
    fn differential_examples() {
        let c = TWElement::<ExactComplex>::new(0, 0, vec![EpsPoly::constant(ec((3, 1), (1, 2))); 2]);
        assert!(differential(&c).is_zero());
        let e = EpsPoly::<ExactComplex>::eps();
        let e2 = TWElement::new(1, 0, vec![&e * &e; 2]);
        let d = differential(&e2);
        assert_eq!(d.degree, 1);
        assert_eq!(d.parts[0], e.scale(&ExactComplex::from_i64(2)));
        assert!(differential(&d).is_zero());
    }

    #[test]
    fn class_of_point() {
        // −½ log|α|²·dε at p = 1 gives −log|α|
        let a = Complex64::new(2.0, 3.0);
        let h = EpsPoly::constant(Complex64::new(-0.5 * a.norm_sqr().ln(), 0.0));
        let x = TWElement::new(1, 1, vec![h.clone(), h]);
        let c = class_of(&x, 1, &[]).unwrap();
        assert!((c.values[0] + a.norm().ln()).abs() < 1e-15);
        assert!(class_of(&TWElement::zero(2, 1, 2), 2, &[]).unwrap().norm() == 0.0);
        assert!(class_of(&TWElement::<Complex64>::zero(2, 0, 2), 2, &[]).is_err());
    }

    #[test]
    fn class_of_boundaries_vanishes() {
        // g(0) ∈ (2πi)^p ℝ, g(1) = 0, then ∫₀¹ g′ = −g(0) projects away
        for p in 1..5usize {
            let unit = twist_unit(p);
            let g = EpsPoly::new(vec![unit * 0.7, Complex64::new(0.3, -1.1), Complex64::new(0.2, 0.5)]);
            let g = &g - &EpsPoly::new(vec![Complex64::zero(), g.at_one()]);
            let x = TWElement::new(p, 0, vec![g.clone(), g.conj()]);
            assert!(x.boundary_conditions_hold(1e-12), "p={p}");
            let c = class_of(&differential(&x), p, &[]).unwrap();
            assert!(c.norm() < 1e-12, "p={p}: {c}");
        }
    }

    #[test]
    fn fixed_part_examples() {
        let r = TWElement::new(0, 0, vec![EpsPoly::constant(Complex64::new(2.0, 0.0)); 2]);
        assert!(r.fixed_part_check());
        let v = Complex64::new(1.0, 2.0);
        let pair = TWElement::new(1, 1, vec![EpsPoly::constant(v), EpsPoly::constant(v.conj())]);
        assert!(pair.fixed_part_check());
        let bad = TWElement::new(1, 1, vec![EpsPoly::constant(v), EpsPoly::constant(v)]);
        assert!(!bad.fixed_part_check());
    }

    #[test]
    fn product_units_and_deps_squared() {
        let x = TWElement::new(1, 1, vec![EpsPoly::new(vec![ec((1, 1), (2, 3)), ec((0, 1), (1, 1))]); 2]);
        assert_eq!(tw_product(&TWElement::unit(2), &x), x);
        assert!(tw_product(&x, &x).is_zero());
    }

    fn arb_ec() -> impl Strategy<Value = ExactComplex> {
        (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(|(a, b, c, d)| ec((a, b), (c, d)))
    }

    fn arb_elem() -> impl Strategy<Value = TWElement<ExactComplex>> {
        (0usize..3, 0u8..2, proptest::collection::vec(proptest::collection::vec(arb_ec(), 0..4), 2))
            .prop_map(|(t, d, ps)| TWElement::new(t, d, ps.into_iter().map(EpsPoly::new).collect()))
    }

    proptest! {
        #[test]
        fn d_squared_is_zero(x in arb_elem()) {
            prop_assert!(differential(&differential(&x)).is_zero());
        }

        #[test]
        fn associative(x in arb_elem(), y in arb_elem(), z in arb_elem()) {
            let a = tw_product(&tw_product(&x, &y), &z);
            let b = tw_product(&x, &tw_product(&y, &z));
            prop_assert_eq!(a.parts, b.parts);
        }

        #[test]
        fn graded_commutative(x in arb_elem(), y in arb_elem()) {
            let a = tw_product(&x, &y);
            let b = tw_product(&y, &x);
            let sign = if x.degree * y.degree % 2 == 1 { -1 } else { 1 };
            let diff: Vec<_> = a.parts.iter().zip(&b.parts).map(|(p, q)| p - &q.scale(&ExactComplex::from_i64(sign))).collect();
            prop_assert!(diff.iter().all(EpsPoly::is_zero));
        }

        #[test]
        fn leibniz(x in arb_elem(), y in arb_elem()) {
            // d(xy) = dx·y + (−1)^{|x|} x·dy in degrees where everything lives
            prop_assume!(x.degree == 0 && y.degree == 0);
            let lhs = differential(&tw_product(&x, &y));
            let rhs = tw_product(&differential(&x), &y).add(&tw_product(&x, &differential(&y))).unwrap();
            prop_assert_eq!(lhs.parts, rhs.parts);
        }

        #[test]
        fn class_linear_and_equivariant(re in -5.0f64..5.0, im in -5.0f64..5.0, s in -3.0f64..3.0, p in 1usize..4) {
            let v = Complex64::new(re, im);
            let x = TWElement::new(p, 1, vec![EpsPoly::new(vec![v, v * 0.5]), EpsPoly::new(vec![v.conj(), v.conj() * 0.5])]);
            let c = class_of(&x, p, &[]).unwrap();
            let c2 = class_of(&x.scale(&Complex64::new(s, 0.0)), p, &[]).unwrap();
            for k in 0..2 {
                prop_assert!((c2.values[k] - s * c.values[k]).abs() < 1e-12);
            }
            let cf = class_of(&x.f_infinity(), p, &[]).unwrap();
            prop_assert!((cf.values[0] - c.values[0]).abs() < 1e-12);
            prop_assert!(c.is_equivariant(1e-12));
        }
    }
}
