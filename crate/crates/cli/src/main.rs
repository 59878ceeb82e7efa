fn main() {
    std::process::exit(vqlab_cli::main_with_args(std::env::args_os()));
}
