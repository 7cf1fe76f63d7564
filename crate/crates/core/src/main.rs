fn main() {
    std::process::exit(vkit::cli::run(std::env::args_os()));
}
