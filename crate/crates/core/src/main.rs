fn main() {
    std::process::exit(philab::cli::main_with_args(std::env::args_os()));
}
