fn main() {
    std::process::exit(coded_cache::cli::main_with_args(std::env::args_os()));
}
