fn main() {
    std::process::exit(mck::cli::main_with_args(std::env::args_os()));
}
