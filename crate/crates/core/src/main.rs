fn main() {
    std::process::exit(onelevel::cli::main_with_args(std::env::args_os()));
}
