//! Exact arithmetic in imaginary quadratic fields ℚ(√−d), with ℚ(i) as the
//! default, plus Gaussian-prime factorization.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::mp::{self, BigComplex};

pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("zero has no factorization")]
    Zero,
    #[error("norm {norm} exceeds the factoring bound {bound}")]
    FactorBound { norm: String, bound: u64 },
    #[error("factorization is only available over Q(i)")]
    Unsupported,
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by zero")]
    DivisionByZero,
}

/// Imaginary quadratic field ℚ(ω) with ω² = −d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    pub d: u32,
}

/// A complex embedding: `conjugate` picks ω ↦ −i√d instead of +i√d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Embedding {
    pub index: usize,
    pub conjugate: bool,
}

impl FieldSpec {
    pub const GAUSSIAN: FieldSpec = FieldSpec { d: 1 };

    pub fn new(d: u32) -> Self {
        assert!(d > 0, "d must be positive");
        FieldSpec { d }
    }

    pub fn r1(&self) -> usize {
        0
    }

    pub fn r2(&self) -> usize {
        1
    }

    pub fn degree(&self) -> usize {
        self.r1() + 2 * self.r2()
    }

    pub fn embeddings(&self) -> Vec<Embedding> {
        vec![
            Embedding { index: 0, conjugate: false },
            Embedding { index: 1, conjugate: true },
        ]
    }

    /// Name of the generator in printed literals.
    pub fn generator_symbol(&self) -> &'static str {
        if self.d == 1 {
            "i"
        } else {
            "w"
        }
    }

    pub fn parse_name(s: &str) -> Option<FieldSpec> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "Q(i)" | "QQ(i)" | "Q(sqrt(-1))" | "gaussian" => Some(FieldSpec::GAUSSIAN),
            _ => {
                let inner = t.strip_prefix("Q(sqrt(-")?.strip_suffix("))")?;
                inner.parse::<u32>().ok().filter(|d| *d > 0).map(FieldSpec::new)
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 1 {
            write!(f, "Q(i)")
        } else {
            write!(f, "Q(sqrt(-{}))", self.d)
        }
    }
}

/// a + b·ω with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    d: u32,
    a: BigRational,
    b: BigRational,
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.d, &self.a, &self.b).cmp(&(other.d, &other.a, &other.b))
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl FieldElement {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        FieldElement { d: 1, a, b }
    }

    pub fn in_field(spec: FieldSpec, a: BigRational, b: BigRational) -> Self {
        FieldElement { d: spec.d, a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        FieldElement::new(rat(a), rat(b))
    }

    pub fn from_fracs(an: i64, ad: i64, bn: i64, bd: i64) -> Self {
        FieldElement::new(
            BigRational::new(an.into(), ad.into()),
            BigRational::new(bn.into(), bd.into()),
        )
    }

    pub fn from_int(a: i64) -> Self {
        FieldElement::from_ints(a, 0)
    }

    pub fn zero() -> Self {
        FieldElement::from_ints(0, 0)
    }

    pub fn one() -> Self {
        FieldElement::from_ints(1, 0)
    }

    pub fn i() -> Self {
        FieldElement::from_ints(0, 1)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { d: self.d }
    }

    pub fn constant_in(spec: FieldSpec, a: i64) -> Self {
        FieldElement::in_field(spec, rat(a), rat(0))
    }

    pub fn with_spec(&self, spec: FieldSpec) -> Self {
        FieldElement { d: spec.d, a: self.a.clone(), b: self.b.clone() }
    }

    pub fn re(&self) -> &BigRational {
        &self.a
    }

    pub fn im(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        FieldElement { d: self.d, a: self.a.clone(), b: -self.b.clone() }
    }

    /// N(x) = x·x̄ = a² + d·b².
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + rat(self.d as i64) * &self.b * &self.b
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(FieldElement { d: self.d, a: &self.a / &n, b: -&self.b / &n })
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, FieldError> {
        o.inv().map(|v| self * &v).ok_or(FieldError::DivisionByZero)
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = FieldElement::constant_in(self.spec(), 1);
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        Some(acc)
    }

    /// Values under the two complex embeddings, rounded to `precision` bits.
    pub fn embed(&self, precision: usize) -> Vec<BigComplex> {
        let p = precision.max(53);
        let re = mp::from_rational(&self.a, p);
        let im = if self.d == 1 {
            mp::from_rational(&self.b, p)
        } else {
            let wp = p + 64;
            let s = mp::from_i64(self.d as i64, wp).sqrt(wp, mp::RM);
            mp::from_rational(&self.b, wp).mul(&s, p, mp::RM)
        };
        let z = BigComplex::new(re, im);
        vec![z.clone(), z.conj()]
    }

    /// Double-precision value under the chosen embedding.
    pub fn to_c64(&self, emb: Embedding) -> num_complex::Complex64 {
        let re = self.a.to_f64().unwrap_or(f64::NAN);
        let im = self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt();
        let z = num_complex::Complex64::new(re, im);
        if emb.conjugate {
            z.conj()
        } else {
            z
        }
    }

    /// Membership in the kernel of x ↦ (log|σ(x)|)_σ, i.e. N(x) = 1.
    pub fn is_log_kernel(&self) -> Result<bool, FieldError> {
        if self.is_zero() {
            return Err(FieldError::Zero);
        }
        Ok(self.norm().is_one())
    }

    /// Writes x = (A + B·ω)/D with A, B, D integers, D > 0 minimal.
    pub fn integral_parts(&self) -> (BigInt, BigInt, BigInt) {
        let d = self.a.denom().lcm(self.b.denom());
        let a = self.a.numer() * (&d / self.a.denom());
        let b = self.b.numer() * (&d / self.b.denom());
        (a, b, d)
    }

    pub fn factor(&self) -> Result<GaussianFactorization, FieldError> {
        self.factor_bounded(DEFAULT_FACTOR_BOUND)
    }

    pub fn factor_bounded(&self, bound: u64) -> Result<GaussianFactorization, FieldError> {
        factor_element(self, bound)
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.d, o.d, "elements of different fields");
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        FieldElement { d: self.d, a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        FieldElement { d: self.d, a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        let d = rat(self.d as i64);
        FieldElement {
            d: self.d,
            a: &self.a * &o.a - d * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl<'a> Div<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn div(self, o: &FieldElement) -> FieldElement {
        self.checked_div(o).expect("division by zero")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { d: self.d, a: -self.a.clone(), b: -self.b.clone() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &FieldElement) -> FieldElement { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl FieldElement {
    /// True when the literal needs parentheses as a factor or summand.
    pub fn is_compound(&self) -> bool {
        !(self.a.is_zero() || self.b.is_zero())
    }

    pub fn is_negative_literal(&self) -> bool {
        if self.a.is_zero() {
            self.b.is_negative()
        } else {
            self.a.is_negative()
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.spec().generator_symbol();
        let imag = |b: &BigRational| -> String {
            if b.is_one() {
                w.to_string()
            } else if *b == -BigRational::one() {
                format!("-{w}")
            } else {
                format!("{}*{w}", fmt_rational(b))
            }
        };
        if self.b.is_zero() {
            write!(f, "{}", fmt_rational(&self.a))
        } else if self.a.is_zero() {
            write!(f, "{}", imag(&self.b))
        } else if self.b.is_negative() {
            write!(f, "{} - {}", fmt_rational(&self.a), imag(&-self.b.clone()))
        } else {
            write!(f, "{} + {}", fmt_rational(&self.a), imag(&self.b))
        }
    }
}

impl FromStr for FieldElement {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, FieldError> {
        crate::parse::parse_field_element(s, FieldSpec::GAUSSIAN)
    }
}

impl FieldElement {
    pub fn parse_in(spec: FieldSpec, s: &str) -> Result<Self, FieldError> {
        crate::parse::parse_field_element(s, spec)
    }
}

/// A Gaussian prime in first-quadrant normal form (re > 0, im ≥ 0).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GaussianPrime {
    pub re: i64,
    pub im: i64,
}

impl GaussianPrime {
    pub fn norm(&self) -> i128 {
        (self.re as i128).pow(2) + (self.im as i128).pow(2)
    }

    pub fn to_element(&self) -> FieldElement {
        FieldElement::from_ints(self.re, self.im)
    }

    fn gauss(&self) -> Gauss {
        Gauss::new(BigInt::from(self.re), BigInt::from(self.im))
    }
}

impl PartialOrd for GaussianPrime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GaussianPrime {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.norm(), self.re, self.im).cmp(&(other.norm(), other.re, other.im))
    }
}

impl fmt::Display for GaussianPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_element())
    }
}

/// x = i^unit · ∏ pᵉ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussianFactorization {
    pub unit: u8,
    pub factors: Vec<(GaussianPrime, i64)>,
}

impl GaussianFactorization {
    pub fn reassemble(&self) -> FieldElement {
        let mut acc = FieldElement::i().pow(self.unit as i64).unwrap();
        for (p, e) in &self.factors {
            acc = &acc * &p.to_element().pow(*e).unwrap();
        }
        acc
    }

    /// Merge (product) of two factorizations.
    pub fn merge(&self, o: &Self) -> Self {
        let mut map: std::collections::BTreeMap<GaussianPrime, i64> = Default::default();
        for (p, e) in self.factors.iter().chain(o.factors.iter()) {
            *map.entry(*p).or_default() += e;
        }
        GaussianFactorization {
            unit: (self.unit + o.unit) % 4,
            factors: map.into_iter().filter(|(_, e)| *e != 0).collect(),
        }
    }
}

impl fmt::Display for GaussianFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = ["1", "i", "-1", "-i"][self.unit as usize];
        write!(f, "{unit}")?;
        for (p, e) in &self.factors {
            if *e == 1 {
                write!(f, "*({p})")?;
            } else {
                write!(f, "*({p})^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct Gauss {
    re: BigInt,
    im: BigInt,
}

impl Gauss {
    fn new(re: BigInt, im: BigInt) -> Self {
        Gauss { re, im }
    }

    fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    fn mul(&self, o: &Gauss) -> Gauss {
        Gauss::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    /// Exact quotient if `o` divides `self`.
    fn div_exact(&self, o: &Gauss) -> Option<Gauss> {
        let n = o.norm();
        let num = self.mul(&Gauss::new(o.re.clone(), -o.im.clone()));
        if (&num.re % &n).is_zero() && (&num.im % &n).is_zero() {
            Some(Gauss::new(num.re / &n, num.im / &n))
        } else {
            None
        }
    }

    fn rem_nearest(&self, o: &Gauss) -> Gauss {
        let n = o.norm();
        let num = self.mul(&Gauss::new(o.re.clone(), -o.im.clone()));
        let round = |x: &BigInt| -> BigInt {
            let two = BigInt::from(2);
            (x * &two + &n).div_floor(&(&n * &two))
        };
        let q = Gauss::new(round(&num.re), round(&num.im));
        let qo = q.mul(o);
        Gauss::new(&self.re - qo.re, &self.im - qo.im)
    }

    fn gcd(a: &Gauss, b: &Gauss) -> Gauss {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !(y.re.is_zero() && y.im.is_zero()) {
            let r = x.rem_nearest(&y);
            x = y;
            y = r;
        }
        x
    }

    /// Unit multiple in the first quadrant (re > 0, im ≥ 0), with the unit
    /// exponent k such that self = i^k · result.
    fn normalize(&self) -> (Gauss, u8) {
        let mut g = self.clone();
        for k in 0..4u8 {
            if g.re.is_positive() && !g.im.is_negative() {
                return (g, k);
            }
            g = Gauss::new(g.im.clone(), -g.re.clone());
        }
        unreachable!("nonzero Gaussian integer has a first-quadrant associate")
    }
}

fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1u128;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// The first-quadrant Gaussian prime above a rational prime p ≡ 1 (mod 4)
/// with the larger real part first; its conjugate associate is the other.
fn split_prime(p: u64) -> GaussianPrime {
    let pp = p as u128;
    let mut c = 2u128;
    let x = loop {
        let x = pow_mod(c, (pp - 1) / 4, pp);
        if x * x % pp == pp - 1 {
            break x;
        }
        c += 1;
    };
    let g = Gauss::gcd(
        &Gauss::new(BigInt::from(p), BigInt::zero()),
        &Gauss::new(BigInt::from(x as u64), BigInt::one()),
    );
    let (g, _) = g.normalize();
    GaussianPrime { re: g.re.to_i64().unwrap(), im: g.im.to_i64().unwrap() }
}

fn conj_prime(q: &GaussianPrime) -> GaussianPrime {
    let (g, _) = Gauss::new(BigInt::from(q.re), BigInt::from(-q.im)).normalize();
    GaussianPrime { re: g.re.to_i64().unwrap(), im: g.im.to_i64().unwrap() }
}

/// Gaussian primes dividing the rational prime p, each listed once.
fn primes_over(p: u64) -> Vec<GaussianPrime> {
    if p == 2 {
        vec![GaussianPrime { re: 1, im: 1 }]
    } else if p % 4 == 3 {
        vec![GaussianPrime { re: p as i64, im: 0 }]
    } else {
        let q = split_prime(p);
        vec![q, conj_prime(&q)]
    }
}

fn norm_u64(n: &BigInt, bound: u64) -> Result<u64, FieldError> {
    match n.to_u64() {
        Some(v) if v <= bound => Ok(v),
        _ => Err(FieldError::FactorBound { norm: n.to_string(), bound }),
    }
}

fn factor_element(x: &FieldElement, bound: u64) -> Result<GaussianFactorization, FieldError> {
    if x.is_zero() {
        return Err(FieldError::Zero);
    }
    if x.d != 1 {
        return Err(FieldError::Unsupported);
    }
    let (a, b, den) = x.integral_parts();
    let num = Gauss::new(a, b);
    let num_norm = norm_u64(&num.norm(), bound)?;
    let den_norm = norm_u64(&(&den * &den), bound)?;
    let mut map: std::collections::BTreeMap<GaussianPrime, i64> = Default::default();
    let mut rest = num.clone();
    for (p, _) in trial_factor(num_norm) {
        for q in primes_over(p) {
            let g = q.gauss();
            while let Some(r) = rest.div_exact(&g) {
                rest = r;
                *map.entry(q).or_default() += 1;
            }
        }
    }
    let den_g = Gauss::new(den.clone(), BigInt::zero());
    let mut drest = den_g;
    for (p, _) in trial_factor(den_norm) {
        for q in primes_over(p) {
            let g = q.gauss();
            while let Some(r) = drest.div_exact(&g) {
                drest = r;
                *map.entry(q).or_default() -= 1;
            }
        }
    }
    let factors: Vec<_> = map.into_iter().filter(|(_, e)| *e != 0).collect();
    let mut f = GaussianFactorization { unit: 0, factors };
    let prod = f.reassemble();
    let u = x / &prod;
    f.unit = match (u.a.to_i64(), u.b.to_i64()) {
        (Some(1), Some(0)) => 0,
        (Some(0), Some(1)) => 1,
        (Some(-1), Some(0)) => 2,
        (Some(0), Some(-1)) => 3,
        _ => unreachable!("residual factor {u} is not a unit"),
    };
    Ok(f)
}
