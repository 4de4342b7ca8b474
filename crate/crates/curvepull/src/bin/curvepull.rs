fn main() {
    std::process::exit(curvepull::cli::main_with_args(std::env::args_os()));
}
