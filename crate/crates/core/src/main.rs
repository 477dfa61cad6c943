fn main() {
    std::process::exit(decnorm::cli::run(std::env::args_os()));
}
