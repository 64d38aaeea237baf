fn main() {
    std::process::exit(intertrain::cli::run(std::env::args_os()));
}
