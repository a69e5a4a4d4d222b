fn main() {
    std::process::exit(ospde::cli::run(std::env::args_os()));
}
