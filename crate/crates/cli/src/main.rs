fn main() {
    std::process::exit(p300_cli::run(std::env::args_os()));
}
