fn main() {
    std::process::exit(ordcmp_cli::main_with_args(std::env::args_os()));
}
