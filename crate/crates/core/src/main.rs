fn main() {
    std::process::exit(varkit::cli::run(std::env::args_os()));
}
