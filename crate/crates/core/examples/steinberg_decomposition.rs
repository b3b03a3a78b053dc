use arith_chow::field::FieldElement;
use arith_chow::k2::{decompose, default_primes, wedge};
use arith_chow::field::DEFAULT_FACTOR_BOUND;

fn main() {
    let a: FieldElement = "2+3*i".parse().unwrap();
    let b: FieldElement = "1-2*i".parse().unwrap();
    println!("{a} ^ {b} = {}", wedge(&a, &b, DEFAULT_FACTOR_BOUND).unwrap());
    let s = default_primes(&a, &b, DEFAULT_FACTOR_BOUND).unwrap();
    let d = decompose(&a, &b, &s, 8, DEFAULT_FACTOR_BOUND).unwrap();
    println!("N = {}, {} candidates", d.n, d.candidates);
    for atom in &d.atoms {
        println!("  {} * ({}) ^ (1 - ({}))", atom.coefficient, atom.gamma, atom.gamma);
    }
    println!("certificate verified: {}", d.verify(DEFAULT_FACTOR_BOUND).unwrap());
}
