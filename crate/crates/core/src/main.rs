use herbidyn::Error;

fn main() {
    let cfg = match herbidyn::cli::parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(),
    };
    match herbidyn::cli::run(cfg) {
        Ok(()) => {}
        // downstream closed early, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("herbidyn: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
