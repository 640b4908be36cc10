fn main() {
    std::process::exit(stitlab::cli::run(std::env::args_os()));
}
