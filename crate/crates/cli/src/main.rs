//! Command-line surface for the exact fractal chain library.

mod args;
mod commands;
mod config;

fn main() {
    // Die quietly when a pipe closes early (e.g. `… | head`).
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let code = match args::parse(std::env::args().skip(1)) {
        Ok(inv) => commands::run(inv),
        Err(message) => {
            eprintln!("{message}");
            eprint!("{}", args::USAGE);
            commands::EXIT_USAGE
        }
    };
    std::process::exit(code);
}
