fn main() {
    std::process::exit(linbandit::harness::cli::run(std::env::args_os()));
}
