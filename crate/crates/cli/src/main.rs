fn main() {
    std::process::exit(setint_cli::run(std::env::args_os()));
}
