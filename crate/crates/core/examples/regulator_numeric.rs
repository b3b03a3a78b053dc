//! Numerical regulator of Totaro curves against the dilogarithm closed form,
//! and the vanishing of W_2 on a curve in the 2-cube.

use arith_chow::cubical::standard;
use arith_chow::polylog::PrecisionPolicy;
use arith_chow::quadrature::QuadParams;
use arith_chow::regulator::{wang_vanishing_check, regulator_curve_numeric, regulator_totaro};

fn main() {
    let q = QuadParams { tol: 1e-8, ..Default::default() };
    let pol = PrecisionPolicy::with_bits(128);
    for s in ["i", "2", "2+3*i", "-1-i", "1/2+1/2*i"] {
        let a = s.parse().unwrap();
        let num = regulator_curve_numeric(&standard::totaro(&a), &q).unwrap();
        let closed = regulator_totaro(&a, &pol).unwrap();
        println!("alpha = {s:<10} numeric {}  closed {}", num.class, closed.class);
    }
    let c = standard::multiplicativity_curve(&"2+3*i".parse().unwrap(), &"1-2*i".parse().unwrap());
    let r = wang_vanishing_check(&c, &q).unwrap();
    println!("{c}: total {:.2e}, residue defect {:.2e}", r.total, r.residue_defect);
}
