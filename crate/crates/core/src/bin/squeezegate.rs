fn main() {
    std::process::exit(squeezegate::cli::run(std::env::args_os()));
}
