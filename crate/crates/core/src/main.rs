fn main() {
    std::process::exit(arith_chow::cli::main_with_args(std::env::args_os()));
}
