fn main() {
    std::process::exit(rangesr::cli::run(std::env::args_os()));
}
