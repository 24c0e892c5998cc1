fn main() {
    std::process::exit(trace2lr::cli::run_cli(std::env::args_os()));
}
