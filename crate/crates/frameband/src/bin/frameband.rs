use frameband::cli;

fn main() {
    let cfg = match cli::parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(), // usage errors exit with code 2
    };
    std::process::exit(cli::run(&cfg));
}
