fn main() {
    std::process::exit(allopdmp::cli::run(std::env::args_os()));
}
