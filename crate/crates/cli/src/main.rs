fn main() {
    std::process::exit(lielab_cli::run(std::env::args_os()));
}
