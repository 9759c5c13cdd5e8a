fn main() {
    std::process::exit(halftheta::cli::run(std::env::args_os()));
}
