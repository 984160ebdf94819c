fn main() {
    std::process::exit(chiral_chain::cli::main_with_args(std::env::args_os()));
}
