fn main() {
    std::process::exit(qcoherence::cli::run(std::env::args_os()));
}
