fn main() {
    std::process::exit(qns::cli::main_with_args(std::env::args_os()));
}
