fn main() {
    std::process::exit(prophetlab_cli::run(std::env::args_os()));
}
