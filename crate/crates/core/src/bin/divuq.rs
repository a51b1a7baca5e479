fn main() {
    std::process::exit(divuq::cli::main_with_args(std::env::args_os()));
}
