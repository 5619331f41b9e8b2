fn main() {
    std::process::exit(ccs::cli::run_cli(std::env::args_os()));
}
