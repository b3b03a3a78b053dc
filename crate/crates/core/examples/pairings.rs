//! The (1,1) pairing of 2+3i and 1-2i, the (1,2) pairing of i with Z_i, and
//! the shape of the groups involved.

use arith_chow::field::FieldSpec;
use arith_chow::pairing::{group_shape, pair_11, pair_1_2_standard, PairingConfig};

fn main() {
    let cfg = PairingConfig::default();
    let r = pair_11(&"2+3*i".parse().unwrap(), &"1-2*i".parse().unwrap(), &cfg).unwrap();
    println!("(2+3i, 1-2i) = {}", r.raw);
    println!("  modulo regulator: q = {:?}, residue {:.2e}", r.reduction.q_hat.iter().map(|q| q.to_string()).collect::<Vec<_>>(), r.reduction.residue_norm());

    let r = pair_1_2_standard(&cfg).unwrap();
    println!("(i, Z_i) = {}", r.raw);
    if let Some(c) = &r.certificate {
        println!("  boundary identity exact: {}", c.exact);
    }

    for (p, n) in [(1, 1), (2, 2), (2, 3)] {
        let g = group_shape(p, n, FieldSpec::GAUSSIAN);
        println!("p={p} n={n}: CH = {}, arithmetic = {}", g.chow, g.arithmetic_tw);
    }
}
