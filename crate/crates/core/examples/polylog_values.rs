//! Bloch-Wigner and single-valued trilogarithm at a few Gaussian rationals.

use arith_chow::field::FieldElement;
use arith_chow::polylog::{bloch_wigner, to_decimal, trilog_sv, PrecisionPolicy};

fn main() {
    let pol = PrecisionPolicy::with_bits(256);
    let p = pol.bits + pol.guard_bits;
    for s in ["i", "2+3*i", "1/2+1/2*i", "-8*i"] {
        let x: FieldElement = s.parse().unwrap();
        let z = &x.embed(p)[0];
        println!("L2({s}) = {}", to_decimal(&bloch_wigner(z, &pol), 40));
        println!("L3({s}) = {}", to_decimal(&trilog_sv(z, &pol), 40));
    }
}
