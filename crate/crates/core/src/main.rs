fn main() {
    std::process::exit(penreflect::harness::cli::main_with_args(std::env::args_os()));
}
