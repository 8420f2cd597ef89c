fn main() {
    std::process::exit(dca_core::cli::main_with_args(std::env::args_os()));
}
