fn main() {
    std::process::exit(casper::cli::run(std::env::args_os()));
}
