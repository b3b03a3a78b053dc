//! Classical polylogarithms Li₁, Li₂, Li₃ and their single-valued versions
//! 𝓛₂ (Bloch–Wigner) and 𝓛₃ at arbitrary precision.

use std::sync::{Mutex, OnceLock};

use astro_float::{BigFloat, Sign};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::mp::{self, BigComplex, RM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolylogError {
    #[error("Li_1 is singular at z = 1 (|z - 1| = {0:e} is inside the guard radius)")]
    Singular(f64),
    #[error("unsupported weight {0}")]
    Weight(u32),
}

/// Working precision and accuracy contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    /// Target precision in bits.
    pub bits: usize,
    /// Extra bits carried internally and not claimed.
    pub guard_bits: usize,
    /// Li₁ refuses inputs with |z − 1| below this radius.
    pub guard_radius: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy::with_bits(256)
    }
}

impl PrecisionPolicy {
    pub fn with_bits(bits: usize) -> Self {
        PrecisionPolicy { bits: bits.max(64), guard_bits: 64, guard_radius: 1e-300 }
    }

    fn working(&self) -> usize {
        self.bits + self.guard_bits
    }

    /// Decimal digits after the point that are claimed correct for values of
    /// modest size.
    pub fn claimed_digits(&self) -> usize {
        ((self.bits - 8) as f64 * std::f64::consts::LOG10_2).floor() as usize
    }

    /// Absolute error bound matching the claimed digits.
    pub fn claimed_error(&self) -> f64 {
        10f64.powi(-(self.claimed_digits().min(300) as i32))
    }
}

/// Bernoulli numbers B₀, B₂, B₄, … (even index), from tangent numbers.
fn bernoulli_even(count: usize) -> Vec<BigRational> {
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().unwrap();
    if guard.len() < count {
        let n = count.max(2 * guard.len()).max(16);
        let mut t = vec![BigInt::zero(); n + 1];
        t[1] = BigInt::one();
        for k in 2..=n {
            t[k] = &t[k - 1] * BigInt::from(k - 1);
        }
        for k in 2..=n {
            for j in k..=n {
                t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
            }
        }
        let mut b = vec![BigRational::one()];
        for (k, tk) in t.iter().enumerate().skip(1) {
            let four_k = BigInt::one() << (2 * k);
            let den = &four_k * (&four_k - BigInt::one());
            let num = tk * BigInt::from(2 * k);
            let v = BigRational::new(num, den);
            b.push(if k.is_odd() { v } else { -v });
        }
        *guard = b;
    }
    guard[..count].to_vec()
}

/// ζ(−m) for m ≥ 0.
fn zeta_nonpositive(m: usize) -> BigRational {
    if m == 0 {
        return BigRational::new((-1).into(), 2.into());
    }
    if m.is_even() {
        return BigRational::zero();
    }
    let b = &bernoulli_even(m.div_ceil(2) + 1)[m.div_ceil(2)];
    -b / BigRational::from_integer(BigInt::from(m + 1))
}

/// ζ(3) = (5/2) Σ (−1)^{k+1} / (k³ C(2k, k)).
pub fn zeta3(p: usize) -> BigFloat {
    static CACHE: OnceLock<Mutex<Option<(usize, BigFloat)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(None));
    if let Some((bits, v)) = cache.lock().unwrap().as_ref() {
        if *bits >= p {
            let mut v = v.clone();
            v.set_precision(p, RM).ok();
            return v;
        }
    }
    let wp = p + 32;
    let mut sum = BigFloat::from_word(0, wp);
    let mut binom = BigInt::one();
    for k in 1..=(wp / 2 + 8) {
        binom = binom * BigInt::from(2 * (2 * k - 1)) / BigInt::from(k);
        let den = &binom * BigInt::from(k).pow(3);
        let term = BigFloat::from_word(1, wp).div(&mp::from_bigint(&den), wp, RM);
        sum = if k.is_odd() { sum.add(&term, wp, RM) } else { sum.sub(&term, wp, RM) };
    }
    let v = sum.mul(&BigFloat::from_f64(2.5, wp), wp, RM);
    *cache.lock().unwrap() = Some((wp, v.clone()));
    v
}

/// ζ(n) for n = 2, 3.
fn zeta_pos(n: u32, p: usize) -> BigFloat {
    match n {
        2 => {
            let pi = mp::pi(p);
            pi.mul(&pi, p, RM).div(&BigFloat::from_word(6, p), p, RM)
        }
        3 => zeta3(p),
        _ => unreachable!(),
    }
}

fn real(x: BigFloat, p: usize) -> BigComplex {
    BigComplex::from_real(x, p)
}

fn rational(r: &BigRational, p: usize) -> BigFloat {
    mp::from_rational(r, p)
}

/// Li_n(z) for n ∈ {1, 2, 3}, principal branch.
pub fn li(n: u32, z: &BigComplex, policy: &PrecisionPolicy) -> Result<BigComplex, PolylogError> {
    if !(1..=3).contains(&n) {
        return Err(PolylogError::Weight(n));
    }
    let p = policy.working();
    let one = real(BigFloat::from_word(1, p), p);
    if n == 1 {
        let w = one.sub(z, p);
        let d = mp::to_f64(&w.abs(p));
        if d < policy.guard_radius || w.is_zero() {
            return Err(PolylogError::Singular(d));
        }
        return Ok(w.ln(p).neg());
    }
    if z.is_zero() {
        return Ok(BigComplex::zero(p));
    }
    let r2 = z.norm_sqr(p);
    let one_f = BigFloat::from_word(1, p);
    if z.im.is_zero() && z.re.cmp(&one_f) == Some(0) {
        return Ok(real(zeta_pos(n, p), p));
    }
    if r2.cmp(&one_f) == Some(1) {
        let inv = z.recip(p);
        let l = z.neg().ln(p);
        let pi = mp::pi(p);
        let pi2_6 = pi.mul(&pi, p, RM).div(&BigFloat::from_word(6, p), p, RM);
        let base = li(n, &inv, policy)?;
        return Ok(if n == 2 {
            let half = BigFloat::from_f64(0.5, p);
            base.neg()
                .sub(&real(pi2_6, p), p)
                .sub(&l.mul(&l, p).scale(&half, p), p)
        } else {
            let sixth = BigFloat::from_word(1, p).div(&BigFloat::from_word(6, p), p, RM);
            base.sub(&l.scale(&pi2_6, p), p).sub(&l.powi(3, p).scale(&sixth, p), p)
        });
    }
    if r2.cmp(&BigFloat::from_f64(0.25, p)) != Some(1) {
        return Ok(direct_series(n, z, p));
    }
    Ok(log_series(n, z, p))
}

fn direct_series(n: u32, z: &BigComplex, p: usize) -> BigComplex {
    let mut sum = BigComplex::zero(p);
    let mut pow = z.clone();
    let eps_exp = -(p as i32) - 4;
    for k in 1.. {
        let kn = BigFloat::from_u64((k as u64).pow(n), p);
        let term = pow.div_real(&kn, p);
        sum = sum.add(&term, p);
        if mp::abs_below_pow2(&term.re, eps_exp) && mp::abs_below_pow2(&term.im, eps_exp) {
            break;
        }
        pow = pow.mul(z, p);
    }
    sum
}

/// Li_n(e^μ) = Σ_{k≠n−1} ζ(n−k) μ^k/k! + μ^{n−1}/(n−1)! (H_{n−1} − log(−μ)).
fn log_series(n: u32, z: &BigComplex, p: usize) -> BigComplex {
    let n = n as usize;
    let mu = z.ln(p);
    let mu_abs = mp::to_f64(&mu.abs(64)).max(1e-300);
    let kmax = ((p as f64 * std::f64::consts::LN_2) / (2.0 * std::f64::consts::PI / mu_abs).ln()).ceil() as usize + n + 8;
    bernoulli_even(kmax / 2 + 4);
    let mut sum = BigComplex::zero(p);
    let mut pow = real(BigFloat::from_word(1, p), p);
    let mut fact = BigInt::one();
    for k in 0..=kmax {
        if k > 0 {
            pow = pow.mul(&mu, p);
            fact *= BigInt::from(k);
        }
        if k + 1 == n {
            let h: BigRational = (1..n).map(|j| BigRational::new(1.into(), BigInt::from(j))).sum();
            let c = real(rational(&h, p), p).sub(&mu.neg().ln(p), p);
            sum = sum.add(&pow.mul(&c, p).div_real(&mp::from_bigint(&fact), p), p);
            continue;
        }
        let coef = if k < n {
            zeta_pos((n - k) as u32, p).div(&mp::from_bigint(&fact), p, RM)
        } else {
            let r = zeta_nonpositive(k - n) / BigRational::from_integer(fact.clone());
            if r.is_zero() {
                continue;
            }
            rational(&r, p)
        };
        sum = sum.add(&pow.scale(&coef, p), p);
    }
    sum
}

fn is_real(z: &BigComplex) -> bool {
    z.im.is_zero()
}

/// Bloch–Wigner dilogarithm 𝓛₂(z) = Im Li₂(z) + arg(1 − z)·log|z|.
pub fn bloch_wigner(z: &BigComplex, policy: &PrecisionPolicy) -> BigFloat {
    let p = policy.working();
    if is_real(z) {
        return BigFloat::from_word(0, p);
    }
    let one = BigFloat::from_word(1, p);
    if z.norm_sqr(p).cmp(&one) == Some(1) {
        return bloch_wigner(&z.recip(p), policy).neg();
    }
    let l2 = li(2, z, policy).expect("weight 2");
    let w = real(one, p).sub(z, p);
    let log_abs = mp::with_consts(|cc| z.norm_sqr(p).ln(p, RM, cc)).div(&BigFloat::from_word(2, p), p, RM);
    l2.im.add(&w.arg(p).mul(&log_abs, p, RM), p, RM)
}

/// Single-valued trilogarithm 𝓛₃(z) = Re(Li₃ − log|z|·Li₂ + ⅓ log²|z|·Li₁).
pub fn trilog_sv(z: &BigComplex, policy: &PrecisionPolicy) -> BigFloat {
    let p = policy.working();
    if z.is_zero() {
        return BigFloat::from_word(0, p);
    }
    let one = BigFloat::from_word(1, p);
    let r2 = z.norm_sqr(p);
    if r2.cmp(&one) == Some(1) {
        return trilog_sv(&z.recip(p), policy);
    }
    if is_real(z) && z.re.cmp(&one) == Some(0) {
        return zeta3(p);
    }
    let l3 = li(3, z, policy).expect("weight 3");
    let l2 = li(2, z, policy).expect("weight 2");
    let log_abs = mp::with_consts(|cc| r2.ln(p, RM, cc)).div(&BigFloat::from_word(2, p), p, RM);
    if log_abs.is_zero() {
        return l3.re;
    }
    let l1 = li(1, z, policy).expect("z ≠ 1");
    let third = log_abs.mul(&log_abs, p, RM).div(&BigFloat::from_word(3, p), p, RM);
    l3.re
        .sub(&log_abs.mul(&l2.re, p, RM), p, RM)
        .add(&third.mul(&l1.re, p, RM), p, RM)
}

/// Rounds to the nearest integer.
pub fn round_to_bigint(x: &BigFloat) -> BigInt {
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return BigInt::zero();
    };
    if x.is_zero() {
        return BigInt::zero();
    }
    let mut mant = BigInt::zero();
    for w in m.iter().rev() {
        mant = (mant << 64) + BigInt::from(*w);
    }
    let shift = e as i64 - 64 * m.len() as i64;
    let v = if shift >= 0 {
        mant << shift as usize
    } else {
        let s = (-shift) as usize;
        let half = BigInt::one() << (s - 1);
        (mant + half) >> s
    };
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Fixed-point decimal string with `digits` places after the point.
pub fn to_decimal(x: &BigFloat, digits: usize) -> String {
    let p = x.precision().unwrap_or(64).max(64) + 4 * digits + 64;
    let scale = BigFloat::from_word(10, p).powi(digits, p, RM);
    let n = round_to_bigint(&x.mul(&scale, p, RM));
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Double-precision shortcuts (computed at the given policy, then rounded).
pub fn bloch_wigner_c64(z: Complex64, policy: &PrecisionPolicy) -> f64 {
    mp::to_f64(&bloch_wigner(&BigComplex::from_c64(z, policy.working()), policy))
}

pub fn trilog_sv_c64(z: Complex64, policy: &PrecisionPolicy) -> f64 {
    mp::to_f64(&trilog_sv(&BigComplex::from_c64(z, policy.working()), policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::with_bits(160)
    }

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_c64(Complex64::new(re, im), 256)
    }

    fn catalan_oracle(p: usize) -> BigFloat {
        // Σ (−1)^k/(2k+1)² accelerated by repeated averaging of partial sums
        let mut sums = Vec::new();
        let mut s = BigFloat::from_word(0, p);
        for k in 0..160u64 {
            let t = BigFloat::from_word(1, p).div(&BigFloat::from_u64((2 * k + 1) * (2 * k + 1), p), p, RM);
            s = if k % 2 == 0 { s.add(&t, p, RM) } else { s.sub(&t, p, RM) };
            if k >= 100 {
                sums.push(s.clone());
            }
        }
        let half = BigFloat::from_f64(0.5, p);
        while sums.len() > 1 {
            sums = sums.windows(2).map(|w| w[0].add(&w[1], p, RM).mul(&half, p, RM)).collect();
        }
        sums.pop().unwrap()
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_even(6);
        let expect = [(1, 1), (1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66)];
        for (v, (n, d)) in b.iter().zip(expect) {
            assert_eq!(*v, BigRational::new(n.into(), d.into()));
        }
        assert_eq!(zeta_nonpositive(1), BigRational::new((-1).into(), 12.into()));
        assert_eq!(zeta_nonpositive(3), BigRational::new(1.into(), 120.into()));
    }

    #[test]
    fn zeta3_value() {
        let z = mp::to_f64(&zeta3(128));
        assert!((z - 1.2020569031595942).abs() < 1e-15);
        let s = to_decimal(&zeta3(256), 30);
        assert_eq!(s, "1.202056903159594285399738161511");
    }

    #[test]
    fn special_values() {
        let p = pol();
        let v = li(2, &c(1.0, 0.0), &p).unwrap();
        assert!((mp::to_f64(&v.re) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!(li(2, &c(0.0, 0.0), &p).unwrap().is_zero());
        assert!(matches!(li(1, &c(1.0, 0.0), &p), Err(PolylogError::Singular(_))));
        let l1 = li(1, &c(-1.0, 0.0), &p).unwrap();
        assert!((mp::to_f64(&l1.re) + 2f64.ln()).abs() < 1e-15);
        let l2 = li(2, &c(-1.0, 0.0), &p).unwrap();
        assert!((mp::to_f64(&l2.re) + std::f64::consts::PI.powi(2) / 12.0).abs() < 1e-15);
        let l2h = li(2, &c(0.5, 0.0), &p).unwrap();
        let expect = std::f64::consts::PI.powi(2) / 12.0 - 2f64.ln().powi(2) / 2.0;
        assert!((mp::to_f64(&l2h.re) - expect).abs() < 1e-15);
    }

    #[test]
    fn catalan() {
        let p = PrecisionPolicy::with_bits(256);
        let g = bloch_wigner(&c(0.0, 1.0), &p);
        let oracle = catalan_oracle(256);
        let d = mp::to_f64(&g.sub(&oracle, 256, RM)).abs();
        assert!(d < 1e-30, "{d}");
        assert!(to_decimal(&g, 16).starts_with("0.9159655941772190"));
    }

    #[test]
    fn trilog_at_i_and_one() {
        let p = PrecisionPolicy::with_bits(256);
        let t = mp::to_f64(&trilog_sv(&c(0.0, 1.0), &p));
        // Σ (−1)^m/(2m)³ = −(3/32)ζ(3)
        let mut oracle = 0.0;
        for m in (1..200000).rev() {
            oracle += if m % 2 == 0 { 1.0 } else { -1.0 } / (8.0 * (m as f64).powi(3));
        }
        assert!((t - oracle).abs() < 1e-14, "{t} {oracle}");
        assert!((t + 3.0 / 32.0 * 1.2020569031595942).abs() < 1e-15);
        assert!((mp::to_f64(&trilog_sv(&c(1.0, 0.0), &p)) - 1.2020569031595942).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_across_regions() {
        // direct series and log series overlap near |z| = 1/2
        let p = pol();
        let wp = p.working();
        for (re, im) in [(0.3, 0.39), (-0.2, 0.45), (0.49, 0.05)] {
            let z = c(re, im);
            for n in [2, 3] {
                let a = direct_series(n, &z, wp);
                let b = log_series(n, &z, wp);
                assert!(mp::to_f64(&a.sub(&b, wp).abs(wp)) < 1e-40);
            }
        }
    }

    #[test]
    fn monotone_refinement() {
        let lo = PrecisionPolicy::with_bits(128);
        let hi = PrecisionPolicy::with_bits(256);
        for (re, im) in [(0.3, 0.8), (-2.0, 1.5), (0.7, -0.1)] {
            let z = c(re, im);
            let a = bloch_wigner(&z, &lo);
            let b = bloch_wigner(&z, &hi);
            let d = mp::to_f64(&a.sub(&b, 256, RM)).abs();
            assert!(d < lo.claimed_error(), "{d}");
        }
    }

    #[test]
    fn decimal_formatting() {
        let x = BigFloat::from_f64(-0.015625, 64);
        assert_eq!(to_decimal(&x, 3), "-0.016");
        assert_eq!(to_decimal(&BigFloat::from_f64(12.5, 64), 2), "12.50");
    }

    fn arb_z() -> impl Strategy<Value = (f64, f64)> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_filter("generic", |(a, b)| b.abs() > 1e-3 && (a * a + b * b) > 1e-4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn bloch_wigner_symmetries((a, b) in arb_z()) {
            let p = pol();
            let wp = p.working();
            let z = c(a, b);
            let v = bloch_wigner(&z, &p);
            let inv = bloch_wigner(&z.recip(wp), &p);
            let conj = bloch_wigner(&z.conj(), &p);
            prop_assert!(mp::to_f64(&v.add(&inv, wp, RM)).abs() < 1e-30);
            prop_assert!(mp::to_f64(&v.add(&conj, wp, RM)).abs() < 1e-30);
            let one = BigComplex::from_real(BigFloat::from_word(1, wp), wp);
            let refl = bloch_wigner(&one.sub(&z, wp), &p);
            prop_assert!(mp::to_f64(&v.add(&refl, wp, RM)).abs() < 1e-30);
        }

        #[test]
        fn trilog_symmetries((a, b) in arb_z()) {
            let p = pol();
            let wp = p.working();
            let z = c(a, b);
            let v = trilog_sv(&z, &p);
            prop_assert!(mp::to_f64(&v.sub(&trilog_sv(&z.conj(), &p), wp, RM)).abs() < 1e-30);
            prop_assert!(mp::to_f64(&v.sub(&trilog_sv(&z.recip(wp), &p), wp, RM)).abs() < 1e-30);
        }

        #[test]
        fn five_term((x1, x2) in (-0.7f64..0.7, -0.7f64..0.7), (y1, y2) in (-0.7f64..0.7, -0.7f64..0.7)) {
            let p = pol();
            let wp = p.working();
            let x = c(x1, x2);
            let y = c(y1, y2);
            let one = BigComplex::from_real(BigFloat::from_word(1, wp), wp);
            let xy = one.sub(&x.mul(&y, wp), wp);
            let args = [x.clone(), y.clone(), one.sub(&x, wp).div(&xy, wp), xy.clone(), one.sub(&y, wp).div(&xy, wp)];
            let mut s = BigFloat::from_word(0, wp);
            for a in &args {
                s = s.add(&bloch_wigner(a, &p), wp, RM);
            }
            prop_assert!(mp::to_f64(&s).abs() < 1e-30);
        }
    }
}
