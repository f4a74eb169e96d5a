fn main() {
    std::process::exit(flowtree::cli::main_with_args(std::env::args_os().collect()));
}
