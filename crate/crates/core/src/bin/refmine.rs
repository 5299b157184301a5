fn main() {
    std::process::exit(refmine::cli::main_with_args(std::env::args_os()));
}
