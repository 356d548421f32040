fn main() {
    std::process::exit(octoport_cli::run(std::env::args_os()));
}
