fn main() {
    std::process::exit(freestable::cli::run(std::env::args_os()));
}
