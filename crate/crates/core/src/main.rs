fn main() {
    std::process::exit(fpp::cli::run(std::env::args_os()));
}
