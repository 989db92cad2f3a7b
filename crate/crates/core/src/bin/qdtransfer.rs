use clap::Parser;
use qdtransfer::cli::Cli;

fn main() {
    let cli = Cli::parse();
    match cli.execute() {
        Ok((summary, path)) => {
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
