fn main() {
    std::process::exit(btmlab::cli::main_with_args(std::env::args_os()));
}
