fn main() {
    std::process::exit(webcorpus::cli::run(std::env::args_os()));
}
