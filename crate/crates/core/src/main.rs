fn main() {
    std::process::exit(gls_core::cli::main_with_args(std::env::args_os()));
}
