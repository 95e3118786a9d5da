fn main() {
    std::process::exit(cacut::cli::run(std::env::args_os()));
}
