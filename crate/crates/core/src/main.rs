fn main() {
    std::process::exit(twoview::cli::run(std::env::args_os()));
}
