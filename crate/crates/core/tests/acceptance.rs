//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::Instant;

use arith_chow::cubical::maps::{codegeneracy, coface, h};
use arith_chow::cubical::{commutativity_homotopy, standard, BoxPoint, Coordinate, ExtValue, FactoredRational, FormalCycle, ParametricPrecycle};
use arith_chow::deligne::DeligneClass;
use arith_chow::field::{FieldElement, FieldSpec};
use arith_chow::mp::{self, BigComplex};
use arith_chow::pairing::{group_shape, pair_11, pair_1_2_standard, reduce_mod_regulator, PairingConfig};
use arith_chow::parse::parse_field_element;
use arith_chow::polylog::{bloch_wigner, trilog_sv, PrecisionPolicy};
use arith_chow::quadrature::QuadParams;
use arith_chow::regulator::{wang_vanishing_check, regulator, regulator_curve_numeric, regulator_totaro, RegulatorOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: FieldSpec = FieldSpec::GAUSSIAN;

fn fe(s: &str) -> FieldElement {
    parse_field_element(s, G).unwrap()
}

fn report(n: usize, name: &str, ok: bool, detail: String, start: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {name}: {verdict} ({detail}; {:.2} s)", start.elapsed().as_secs_f64());
}

fn rand_rational(rng: &mut ChaCha8Rng) -> (i64, i64) {
    (rng.gen_range(-12..=12), rng.gen_range(1..=7))
}

fn rand_elem(rng: &mut ChaCha8Rng) -> FieldElement {
    let (a, b) = rand_rational(rng);
    let (c, d) = rand_rational(rng);
    FieldElement::from_fracs(a, b, c, d)
}

fn rand_generic(rng: &mut ChaCha8Rng) -> FieldElement {
    loop {
        let x = rand_elem(rng);
        if !x.is_zero() && !x.is_one() {
            return x;
        }
    }
}

fn rand_ext(rng: &mut ChaCha8Rng) -> ExtValue {
    match rng.gen_range(0..8) {
        0 => ExtValue::Infinity,
        1 => ExtValue::zero(),
        _ => loop {
            let x = rand_elem(rng);
            if !x.is_one() {
                break ExtValue::Finite(x);
            }
        },
    }
}

#[test]
fn c01_totaro_boundary() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ok = true;
    for _ in 0..20 {
        let a = rand_generic(&mut rng);
        let d = FormalCycle::param(standard::totaro(&a)).boundary().unwrap();
        let want = BoxPoint::from_elements(&[a.clone(), &FieldElement::one() - &a]).unwrap();
        ok &= d == FormalCycle::point(want);
    }
    let mut surfaces = 0;
    for a in ["i", "2+3*i", "-1/2", "1/2+1/2*i", "-1-i", "7"] {
        let a = fe(a);
        for s in [standard::c_prime(&a), standard::c_double_prime(&a), standard::xi(&a)] {
            let d = FormalCycle::param(s).boundary().unwrap();
            ok &= d.boundary().unwrap().is_zero();
            surfaces += 1;
        }
        ok &= standard::weight3_precycle(&a).boundary().unwrap().boundary().unwrap().is_zero();
    }
    let fast = t.elapsed().as_secs_f64() < 1.0;
    report(1, "totaro boundary and delta^2 = 0", ok && fast, format!("20 alphas, {surfaces} surfaces"), t);
    assert!(ok);
}

#[test]
fn c02_cubical_homotopy_identities() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = true;
    for _ in 0..1000 {
        let p: Vec<ExtValue> = (0..4).map(|_| rand_ext(&mut rng)).collect();
        let j = rng.gen_range(1..4);
        let l = rng.gen_range(0..2u8);
        ok &= h(&coface(&p, j, 0, G), j) == p;
        ok &= h(&coface(&p, j + 1, 0, G), j) == p;
        let tail = coface(&codegeneracy(&p, j), j, 1, G);
        ok &= h(&coface(&p, j, 1, G), j) == tail;
        ok &= h(&coface(&p, j + 1, 1, G), j) == tail;
        for i in 1..j {
            ok &= h(&coface(&p, i, l, G), j) == coface(&h(&p, j - 1), i, l, G);
        }
        for i in j + 2..=5 {
            ok &= h(&coface(&p, i, l, G), j) == coface(&h(&p, j), i - 1, l, G);
        }
    }
    let opts = RegulatorOptions::default();
    let mut discarded_zero = true;
    let mut nonempty = 0;
    for _ in 0..20 {
        let (a, b) = (rand_generic(&mut rng), rand_generic(&mut rng));
        let pa = FormalCycle::point(BoxPoint::from_elements(&[a]).unwrap());
        let pb = FormalCycle::point(BoxPoint::from_elements(&[b]).unwrap());
        let ab = pa.product(&pb).unwrap();
        let ba = pb.product(&pa).unwrap();
        let hom = commutativity_homotopy(&ab, 1, 1).unwrap();
        let d = hom.boundary().unwrap();
        let kept = d.without_degenerate();
        ok &= kept == ab.try_add(&ba).unwrap();
        let dropped = d.sub(&kept).unwrap();
        if !dropped.is_zero() {
            nonempty += 1;
            let r = regulator(&dropped, &opts).unwrap();
            discarded_zero &= r.class.norm() == 0.0;
        }
    }
    let fast = t.elapsed().as_secs_f64() < 10.0;
    report(2, "cubical homotopy identities", ok && discarded_zero && fast, format!("1000 points, 20 products, {nonempty} with degenerate terms"), t);
    assert!(ok && discarded_zero);
}

/// Catalan's constant from its alternating series, accelerated.
fn catalan_oracle() -> f64 {
    let n = 30;
    let mut d = (3.0 + 8f64.sqrt()).powi(n);
    d = (d + 1.0 / d) / 2.0;
    let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
    for k in 0..n {
        c = b - c;
        let kf = k as f64;
        s += c / ((2.0 * kf + 1.0) * (2.0 * kf + 1.0));
        let nf = n as f64;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// ζ(3) = (5/2) Σ (−1)^{k+1} / (k³ C(2k, k)).
fn zeta3_oracle() -> f64 {
    let mut s = 0.0;
    let mut binom = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        binom *= (2.0 * kf - 1.0) * (2.0 * kf) / (kf * kf);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        s += sign / (kf * kf * kf * binom);
    }
    2.5 * s
}

#[test]
fn c03_polylog_suite() {
    let t = Instant::now();
    let pol = PrecisionPolicy::with_bits(256);
    let p = pol.bits + pol.guard_bits;
    let i = BigComplex::from_c64(num_complex::Complex64::new(0.0, 1.0), p);
    let d2 = |z: &BigComplex| mp::to_f64(&bloch_wigner(z, &pol));
    let cat_err = (d2(&i) - catalan_oracle()).abs();
    let mut ok = cat_err <= 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let one = BigComplex::from_c64(num_complex::Complex64::new(1.0, 0.0), p);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut pick = || BigComplex::from_c64(num_complex::Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), p);
        let (x, y) = (pick(), pick());
        worst = worst.max((d2(&x.recip(p)) + d2(&x)).abs());
        let xy = one.sub(&x.mul(&y, p), p);
        let five = d2(&x)
            + d2(&y)
            + d2(&one.sub(&x, p).div(&xy, p))
            + d2(&xy)
            + d2(&one.sub(&y, p).div(&xy, p));
        worst = worst.max(five.abs());
    }
    ok &= worst <= 1e-12;
    let l3 = mp::to_f64(&trilog_sv(&i, &pol));
    let l3_err = (l3 + 3.0 / 32.0 * zeta3_oracle()).abs();
    ok &= l3_err <= 1e-12;
    let fast = t.elapsed().as_secs_f64() < 30.0;
    report(
        3,
        "polylog suite",
        ok && fast,
        format!("catalan {cat_err:.1e}, relations {worst:.1e}, trilog {l3_err:.1e}"),
        t,
    );
    assert!(ok);
}

#[test]
fn c04_regulator_cross_check() {
    let t = Instant::now();
    let pol = PrecisionPolicy::with_bits(128);
    let q = QuadParams::default();
    let mut worst: f64 = 0.0;
    for a in ["i", "2", "2+3*i", "-1-i", "1/2+1/2*i"] {
        let a = fe(a);
        let num = regulator_curve_numeric(&standard::totaro(&a), &q).unwrap();
        let closed = regulator_totaro(&a, &pol).unwrap();
        worst = worst.max(num.class.sub(&closed.class).unwrap().norm());
    }
    let ok = worst <= 1e-4 && t.elapsed().as_secs_f64() <= 300.0;
    report(4, "numeric vs closed-form regulator", ok, format!("max deviation {worst:.2e}"), t);
    assert!(worst <= 1e-4);
}

fn curve(c: FieldElement, roots: &[(FieldElement, i64)]) -> ParametricPrecycle {
    ParametricPrecycle::curve(vec![
        Coordinate::Func(FactoredRational::variable(1, 0, G)),
        Coordinate::Func(FactoredRational::from_roots(c, roots)),
    ])
    .unwrap()
}

#[test]
fn c05_wang_form_vanishing() {
    let t = Instant::now();
    let q = QuadParams { tol: 1e-8, ..Default::default() };
    let mut curves = vec![
        standard::multiplicativity_curve(&fe("2+3*i"), &fe("1-2*i")),
        curve(FieldElement::one(), &[(fe("i"), 4), (FieldElement::one(), -4)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while curves.len() < 7 {
        let k = rng.gen_range(2..=3);
        let mut roots: Vec<(FieldElement, i64)> = Vec::new();
        while roots.len() < k {
            let a = rand_elem(&mut rng);
            if !a.is_zero() && roots.iter().all(|(b, _)| *b != a) {
                roots.push((a, rng.gen_range(1..=3)));
            }
        }
        let s: i64 = roots[..k - 1].iter().map(|r| r.1).sum();
        roots[k - 1].1 = -s;
        curves.push(curve(rand_generic(&mut rng), &roots));
    }
    let (mut total, mut residue): (f64, f64) = (0.0, 0.0);
    for c in &curves {
        let r = wang_vanishing_check(c, &q).unwrap();
        total = total.max(r.total);
        residue = residue.max(r.residue_defect);
    }
    let ok = total <= 1e-6 && residue <= 1e-6;
    let fast = t.elapsed().as_secs_f64() <= 120.0;
    report(5, "W_2 vanishing on curves", ok && fast, format!("7 curves, total {total:.1e}, residue {residue:.1e}"), t);
    assert!(ok);
}

#[test]
fn c06_worked_example() {
    let t = Instant::now();
    let cfg = PairingConfig::default();
    let r = pair_11(&fe("2+3*i"), &fe("1-2*i"), &cfg).unwrap();
    let pol = PrecisionPolicy::with_bits(128);
    let p = pol.bits + pol.guard_bits;
    let d2 = |x: &str| mp::to_f64(&bloch_wigner(&fe(x).embed(p)[0], &pol));
    let s = -d2("-1-i") / (2.0 * PI) + d2("-8*i") / (12.0 * PI) + d2("2+3*i") / (2.0 * PI);
    let reference = DeligneClass::from_first(2, &[(s, 1e-15)]);
    let red = reduce_mod_regulator(&r.raw.sub(&reference).unwrap(), &r.generators, 144);
    let ok = red.residue_norm() <= 1e-9;
    let q = red.q_hat.first().map(|q| q.to_string()).unwrap_or_default();
    let fast = t.elapsed().as_secs_f64() < 60.0;
    report(6, "worked (1,1) example", ok && fast, format!("residue {:.1e}, multiple {q}", red.residue_norm()), t);
    assert!(ok);
}

#[test]
fn c07_weight3_example() {
    let t = Instant::now();
    let cfg = PairingConfig::default();
    let r = pair_1_2_standard(&cfg).unwrap();
    let cert = r.certificate.as_ref().unwrap();
    let l = r.vanishing.as_ref().unwrap();
    let xi_zero = l.total <= 1e-6 && l.residue_defect <= 1e-6;
    let reference = -3.0 / (16.0 * PI * PI) * zeta3_oracle();
    let value_err = (r.raw.values[0] - reference).abs();
    let value_ok = value_err <= 1e-10;
    let fast = t.elapsed().as_secs_f64() < 120.0;
    report(
        7,
        "weight-3 example",
        cert.exact && xi_zero && value_ok && fast,
        format!(
            "certificate {}, P(Xi) {:.1e}, value error {value_err:.1e}",
            if cert.exact { "exact" } else { "mismatch" },
            l.total
        ),
        t,
    );
    if !cert.exact {
        println!("    certificate difference: {}", cert.difference.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" + "));
    }
    assert!(xi_zero && value_ok);
}

/// Expected descriptors over Q(i) (r1 = 0, r2 = 1), transcribed by hand.
fn expected(p: usize, n: usize) -> [String; 5] {
    let tw_r = |p: usize| if p % 2 == 1 { "r1+r2" } else { "r2" };
    let chow = match (p, n) {
        (0, 0) => "Q".to_string(),
        (1, 1) => "F^x (x) Q".to_string(),
        _ if p > 0 && n == 2 * p - 1 => format!("Q^({})", tw_r(p)),
        _ => "0".to_string(),
    };
    let deligne = match (p, n) {
        (0, 0) => "R^(r1+r2)".to_string(),
        (p, 1) if p > 0 => format!("R({})^({})", p - 1, tw_r(p)),
        _ => "0".to_string(),
    };
    let quotient = format!("H^1_D(F,R({p}))/im(rho_Be)");
    let arith_d = if (p, n) == (0, 0) {
        "CH^0(F,0)_Q = Q".to_string()
    } else if p > 0 && n == 2 * p - 1 {
        format!("CH^{p}(F,{n})_Q = {chow}")
    } else if p > 0 && n == 2 * p - 2 {
        quotient.clone()
    } else {
        "0".to_string()
    };
    let arith_tw = if (p, n) == (0, 0) {
        "Q".to_string()
    } else if p > 0 && n == 2 * p - 1 {
        format!("0 -> D_TW^0(F,{p}) -> . -> CH^{p}(F,{n})_Q = {chow} -> 0")
    } else if p > 0 && n == 2 * p - 2 {
        quotient.clone()
    } else {
        "0".to_string()
    };
    let zero = if (p, n) == (0, 0) {
        "0".to_string()
    } else if p > 0 && n == 2 * p - 2 {
        quotient
    } else if p == 1 && n == 1 {
        "ker(log|.|)".to_string()
    } else if p > 1 && n == 2 * p - 1 {
        "torsion".to_string()
    } else {
        "-".to_string()
    };
    [chow, deligne, arith_d, arith_tw, zero]
}

#[test]
fn c08_group_bookkeeping() {
    let t = Instant::now();
    let mut mismatches = Vec::new();
    for p in 0..=5 {
        for n in 0..=10 {
            let g = group_shape(p, n, G);
            let got = [
                g.chow.to_string(),
                g.deligne.to_string(),
                g.arithmetic_d.to_string(),
                g.arithmetic_tw.to_string(),
                g.arithmetic_zero.map(|z| z.to_string()).unwrap_or_else(|| "-".into()),
            ];
            if got != expected(p, n) {
                mismatches.push(format!("({p},{n})"));
            }
        }
    }
    let ok = mismatches.is_empty();
    let fast = t.elapsed().as_secs_f64() < 1.0;
    report(8, "group bookkeeping", ok && fast, format!("66 cases, mismatches [{}]", mismatches.join(" ")), t);
    assert!(ok);
}

#[test]
fn c09_log_kernel() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let units = [fe("1"), fe("i"), fe("-1"), fe("-i")];
    let p = 512;
    let (mut ok, mut accepted) = (true, 0);
    for k in 0..1000 {
        let x = if k % 2 == 0 {
            let (m, n) = (rng.gen_range(1..20i64), rng.gen_range(0..20i64));
            let c = m * m + n * n;
            let base = FieldElement::from_fracs(m * m - n * n, c, 2 * m * n, c);
            let e = rng.gen_range(-2..=2);
            let mut x = &base.pow(e).unwrap() * &units[rng.gen_range(0..4)];
            if rng.gen_bool(0.3) {
                x = &x * &FieldElement::from_ints(rng.gen_range(2..5), 0);
            }
            x
        } else {
            loop {
                let x = rand_elem(&mut rng);
                if !x.is_zero() {
                    break x;
                }
            }
        };
        let claim = x.is_log_kernel().unwrap();
        let w = &x.embed(p)[0];
        let dev = w.norm_sqr(p).sub(&mp::from_i64(1, p), p, mp::RM);
        let numeric = mp::abs_below_pow2(&dev, -400);
        ok &= claim == numeric;
        accepted += claim as usize;
    }
    ok &= fe("3/5+4/5*i").is_log_kernel().unwrap();
    let fast = t.elapsed().as_secs_f64() < 1.0;
    report(9, "kernel of log", ok && fast, format!("1000 elements, {accepted} accepted"), t);
    assert!(ok);
}

#[test]
fn c10_parity_vanishing() {
    let t = Instant::now();
    let cfg = PairingConfig::default();
    let pairs = [
        ("3/5+4/5*i", "5/13+12/13*i"),
        ("3/5+4/5*i", "12/13+5/13*i"),
        ("3/5+4/5*i", "8/17+15/17*i"),
        ("4/5+3/5*i", "5/13+12/13*i"),
        ("4/5+3/5*i", "8/17+15/17*i"),
        ("3/5-4/5*i", "5/13+12/13*i"),
        ("-3/5+4/5*i", "12/13+5/13*i"),
        ("5/13+12/13*i", "8/17+15/17*i"),
        ("12/13+5/13*i", "-7/25+24/25*i"),
        ("3/5+4/5*i", "i"),
    ];
    let mut worst: f64 = 0.0;
    let mut atoms = 0;
    let mut ok = true;
    for (a, b) in pairs {
        match pair_11(&fe(a), &fe(b), &cfg) {
            Ok(r) => {
                worst = worst.max(r.reduction.residue_norm());
                atoms += r.decomposition.as_ref().map_or(0, |d| d.atoms.len());
            }
            Err(e) => {
                println!("    ({a}, {b}): {e}");
                ok = false;
            }
        }
    }
    ok &= worst <= 1e-9;
    let fast = t.elapsed().as_secs_f64() <= 120.0;
    report(10, "parity vanishing", ok && fast, format!("10 pairs, {atoms} atoms, residue {worst:.1e}"), t);
    assert!(ok);
}
