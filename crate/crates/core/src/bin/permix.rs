fn main() {
    std::process::exit(permix::cli::main_with_args(std::env::args_os()));
}
