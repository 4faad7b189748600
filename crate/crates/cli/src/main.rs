fn main() {
    std::process::exit(plrefine_cli::run(std::env::args_os()));
}
