fn main() {
    std::process::exit(ontorules::cli::run(std::env::args_os()));
}
