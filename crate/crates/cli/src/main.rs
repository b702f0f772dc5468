fn main() {
    std::process::exit(damposc_cli::run(std::env::args_os()));
}
