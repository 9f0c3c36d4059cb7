fn main() {
    std::process::exit(infoflow::cli::run(std::env::args_os()));
}
