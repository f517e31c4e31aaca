fn main() {
    std::process::exit(leo_routing::cli::run(std::env::args_os()));
}
