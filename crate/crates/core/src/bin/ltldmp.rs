fn main() {
    std::process::exit(ltl_dmp::cli::main_with_args(std::env::args()));
}
