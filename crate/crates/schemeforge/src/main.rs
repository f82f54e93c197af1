fn main() {
    std::process::exit(schemeforge::cli::run_from(std::env::args()));
}
