fn main() {
    std::process::exit(ergox::cli::main_with_args(std::env::args_os()));
}
