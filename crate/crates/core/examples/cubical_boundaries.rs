use arith_chow::cubical::standard;
use arith_chow::field::FieldSpec;
use arith_chow::parse::parse_cycle;

fn main() {
    let c = parse_cycle("(z; 1 - (2+3*i)*(z)^-1; 1 - z)", FieldSpec::GAUSSIAN).unwrap();
    println!("d{c} = {}", c.boundary().unwrap());

    let a = "i".parse().unwrap();
    let z = standard::z_cycle(&a);
    println!("Z_i = {z}");
    println!("dZ_i = {}", z.boundary().unwrap().without_degenerate());

    let w = standard::weight3_precycle(&a);
    let d = w.boundary().unwrap();
    println!("d(4(C'-C'')-Xi) = {d}");
    println!("d^2 = 0: {}", d.boundary().unwrap().is_zero());
}
