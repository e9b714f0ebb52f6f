fn main() {
    std::process::exit(vrdforge::cli::run(std::env::args_os()));
}
