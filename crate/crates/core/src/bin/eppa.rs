fn main() {
    std::process::exit(eppa::cli::run(std::env::args_os()));
}
