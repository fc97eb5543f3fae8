use scattershrink::cli;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match cli::dispatch(&args) {
        Ok(()) => {}
        Err(e) => {
            if matches!(&e, scattershrink::CliError::Usage(m) if m.is_empty()) {
                // explicit --help
                print!("{}", cli::USAGE);
                return;
            }
            eprintln!("{e}");
            if matches!(&e, scattershrink::CliError::Usage(_)) {
                eprintln!("{}", cli::USAGE);
            }
            std::process::exit(e.exit_code());
        }
    }
}
