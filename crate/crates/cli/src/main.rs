fn main() {
    std::process::exit(loewner_cli::main_with_args(std::env::args_os()));
}
