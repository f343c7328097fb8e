fn main() {
    std::process::exit(dsmsim::cli::run(std::env::args_os()));
}
