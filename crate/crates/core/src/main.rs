fn main() {
    std::process::exit(ltipc::cli::main_with_args(std::env::args_os()));
}
