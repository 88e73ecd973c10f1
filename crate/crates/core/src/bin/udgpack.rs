fn main() {
    std::process::exit(udgpack::cli::run(std::env::args_os()));
}
