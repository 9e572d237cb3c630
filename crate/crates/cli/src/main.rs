fn main() {
    std::process::exit(chromaforge_cli::run(std::env::args_os()));
}
