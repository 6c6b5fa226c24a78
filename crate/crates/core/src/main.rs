fn main() {
    let mut out = std::io::stdout().lock();
    std::process::exit(qinduce::cli::run_cli(std::env::args_os(), &mut out));
}
