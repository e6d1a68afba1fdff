//! Run every analysis on a model file and print the JSON report, as the
//! `mech all` command does.
//!
//! ```not_rust
//! cargo run --example model_report -- crates/core/models/central_force.toml
//! ```

use mech::cli::{analyse, Command};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/central_force.toml").to_string());
    let text = std::fs::read_to_string(&path).expect("readable model");
    match analyse(Command::All, &text, Some(1)) {
        Ok(run) => {
            println!("{}", serde_json::to_string_pretty(&run.report).unwrap());
            for (name, csv) in &run.csv {
                println!("{name}: {} rows", csv.lines().count() - 1);
            }
        }
        Err(f) => eprintln!("{} (exit {})", f.message, f.code),
    }
}
