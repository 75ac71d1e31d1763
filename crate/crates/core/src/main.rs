fn main() {
    std::process::exit(posdef::cli::run(std::env::args_os()));
}
