fn main() {
    std::process::exit(shockfit::cli::run(std::env::args_os()));
}
