fn main() {
    std::process::exit(ghshift::cli::main_with_args(std::env::args_os()));
}
