fn main() {
    std::process::exit(betapot::cli::main_with_args(std::env::args_os().collect()));
}
