//! Thin multiprecision layer over `astro-float`: exact conversions from
//! big rationals, a complex type, and the handful of elementary complex
//! functions the polylogarithm code needs.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

/// Runs `f` with the thread-local constant cache.
pub fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn from_i64(v: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(v, p.max(64))
}

/// Exact conversion of an integer (the precision is widened as needed).
pub fn from_bigint(v: &BigInt) -> BigFloat {
    let (sign, words) = v.to_u64_digits();
    let bits = (words.len() + 1) * 64;
    let base = BigFloat::from_f64(18446744073709551616.0, bits);
    let mut acc = BigFloat::from_word(0, bits);
    for w in words.iter().rev() {
        acc = acc
            .mul(&base, bits, RM)
            .add(&BigFloat::from_word(*w, bits), bits, RM);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

/// Correctly rounded conversion of a rational.
pub fn from_rational(v: &BigRational, p: usize) -> BigFloat {
    if v.is_zero() {
        return BigFloat::from_word(0, p);
    }
    let n = from_bigint(v.numer());
    let d = from_bigint(v.denom());
    n.div(&d, p, RM)
}

pub fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _n, sign, e, _)) => {
            if x.is_zero() || m.is_empty() {
                return 0.0;
            }
            let top = m[m.len() - 1] as f64;
            let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
            let mant = top + next / 18446744073709551616.0;
            let v = mant * 2f64.powi(e - 64);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

pub fn from_f64(v: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(v, p.max(64))
}

/// Complex number with multiprecision parts.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(p: usize) -> Self {
        BigComplex::new(BigFloat::from_word(0, p), BigFloat::from_word(0, p))
    }

    pub fn from_real(re: BigFloat, p: usize) -> Self {
        BigComplex::new(re, BigFloat::from_word(0, p))
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, p: usize) -> Self {
        BigComplex::new(from_rational(re, p), from_rational(im, p))
    }

    pub fn from_c64(z: Complex64, p: usize) -> Self {
        BigComplex::new(from_f64(z.re, p), from_f64(z.im, p))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self, p: usize) -> Self {
        BigComplex::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn sub(&self, o: &Self, p: usize) -> Self {
        BigComplex::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM))
    }

    pub fn neg(&self) -> Self {
        BigComplex::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &Self, p: usize) -> Self {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        BigComplex::new(re, im)
    }

    pub fn scale(&self, s: &BigFloat, p: usize) -> Self {
        BigComplex::new(self.re.mul(s, p, RM), self.im.mul(s, p, RM))
    }

    pub fn div_real(&self, s: &BigFloat, p: usize) -> Self {
        BigComplex::new(self.re.div(s, p, RM), self.im.div(s, p, RM))
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn abs(&self, p: usize) -> BigFloat {
        self.norm_sqr(p).sqrt(p, RM)
    }

    pub fn recip(&self, p: usize) -> Self {
        let n = self.norm_sqr(p);
        BigComplex::new(self.re.div(&n, p, RM), self.im.neg().div(&n, p, RM))
    }

    pub fn div(&self, o: &Self, p: usize) -> Self {
        self.mul(&o.recip(p), p)
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self, p: usize) -> BigFloat {
        atan2(&self.im, &self.re, p)
    }

    /// Principal logarithm.
    pub fn ln(&self, p: usize) -> Self {
        let r = with_consts(|cc| self.norm_sqr(p + 64).ln(p + 64, RM, cc));
        let half = BigFloat::from_f64(0.5, p);
        BigComplex::new(r.mul(&half, p, RM), self.arg(p))
    }

    pub fn exp(&self, p: usize) -> Self {
        with_consts(|cc| {
            let m = self.re.exp(p, RM, cc);
            let c = self.im.cos(p, RM, cc);
            let s = self.im.sin(p, RM, cc);
            BigComplex::new(m.mul(&c, p, RM), m.mul(&s, p, RM))
        })
    }

    pub fn powi(&self, n: usize, p: usize) -> Self {
        let mut acc = BigComplex::from_real(BigFloat::from_word(1, p), p);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            base = base.mul(&base, p);
            k >>= 1;
        }
        acc
    }
}

/// Two-argument arctangent with the principal branch (−π, π].
pub fn atan2(y: &BigFloat, x: &BigFloat, p: usize) -> BigFloat {
    let wp = p + 32;
    if x.is_zero() {
        if y.is_zero() {
            return BigFloat::from_word(0, p);
        }
        let h = pi(wp).div(&BigFloat::from_word(2, wp), wp, RM);
        return if y.is_negative() { h.neg() } else { h };
    }
    let t = with_consts(|cc| y.div(x, wp, RM).atan(wp, RM, cc));
    if x.is_positive() {
        t
    } else if y.is_negative() {
        t.sub(&pi(wp), wp, RM)
    } else {
        t.add(&pi(wp), wp, RM)
    }
}

/// Absolute value comparison helper: |x| < 2^e.
pub fn abs_below_pow2(x: &BigFloat, e: i32) -> bool {
    if x.is_zero() {
        return true;
    }
    match x.exponent() {
        Some(ex) => ex <= e,
        None => false,
    }
}

pub fn is_neg(x: &BigFloat) -> bool {
    x.is_negative() && !x.is_zero()
}

pub fn abs_bigint_bits(v: &BigInt) -> u64 {
    v.abs().bits()
}
