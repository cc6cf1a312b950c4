//! Run a JSON experiment config and print where the results went.
//! Defaults to the bundled two-user config.

use std::path::PathBuf;

use kronmac::experiment::run_experiment;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/two_user_linear.json"));
    match run_experiment(&path) {
        Ok(summary) => {
            println!("{} rows -> {}", summary.rows.len(), summary.csv_path.display());
            println!("metadata -> {}", summary.sidecar_path.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
