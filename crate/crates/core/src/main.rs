fn main() {
    std::process::exit(mcsma::cli::main_with_args(std::env::args_os()));
}
