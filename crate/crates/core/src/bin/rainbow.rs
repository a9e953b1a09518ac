fn main() {
    std::process::exit(rainbow_matching::cli::run(std::env::args_os()));
}
