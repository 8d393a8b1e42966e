fn main() {
    std::process::exit(escobar::cli::main_with_args(std::env::args_os()));
}
