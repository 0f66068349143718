fn main() {
    std::process::exit(eablock::cli::run(std::env::args_os()));
}
