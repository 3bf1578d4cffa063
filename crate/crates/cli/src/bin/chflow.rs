fn main() {
    std::process::exit(chflow::run_cli(std::env::args_os()));
}
