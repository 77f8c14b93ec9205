fn main() {
    std::process::exit(fracplap::cli::run(std::env::args_os()));
}
