fn main() {
    std::process::exit(lowt_core::cli::main_with_args(std::env::args_os()));
}
