fn main() {
    railblock::cli::init_logging();
    std::process::exit(railblock::cli::run(std::env::args_os()));
}
