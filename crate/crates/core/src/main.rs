fn main() {
    std::process::exit(iqa_core::cli::run(std::env::args_os()));
}
