fn main() {
    std::process::exit(symflex::cli::run(std::env::args_os()));
}
