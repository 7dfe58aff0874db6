use std::process::exit;

fn main() {
    exit(mmae_cli::run(std::env::args_os()));
}
