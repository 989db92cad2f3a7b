//! Runs an experiment from an inline TOML config, the way the binary does,
//! and prints the CSV it would write.

use qdtransfer::cli::{run, RunConfig};

const CONFIG: &str = r#"
experiment = "transfer"
trials = 5000
seed = 42
engine = "montecarlo"
profile = "device"

[noise.optics]
analyzer_depolarization = 0.1

[transfer]
targets = ["h", { theta = 1.0, phi = 0.5 }]
"#;

fn main() -> qdtransfer::Result<()> {
    let out = run(&RunConfig::from_toml(CONFIG)?)?;
    print!("{}", out.summary);
    println!();
    print!("{}", out.csv);
    Ok(())
}
