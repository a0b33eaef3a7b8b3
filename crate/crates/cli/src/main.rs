fn main() {
    std::process::exit(fdrisk_cli::main_with_args(std::env::args_os()));
}
