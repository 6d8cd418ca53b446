fn main() {
    std::process::exit(pgarc::cli::run(std::env::args_os()));
}
