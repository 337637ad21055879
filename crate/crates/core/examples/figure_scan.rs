//! Drives the scan harness programmatically and prints the rows that fall
//! inside the validity band of the first-order formulas.

use ghshift::experiments::{run_scan, ScanConfig};

fn main() -> ghshift::Result<()> {
    let mut config = ScanConfig::fig1(500.0);
    config.sweep = vec![-0.2, -0.1, -0.05, 0.05, 0.1, 0.2];
    config.evolution_values = vec![1.0];
    for row in run_scan(&config)? {
        let err = row
            .relative_error()
            .map_or("-".to_string(), |e| format!("{:.2}%", 100.0 * e));
        println!(
            "r = {:+.3}  {:<16}  measured {:+.6}  predicted {:+.6}  rel.err {err}",
            row.abscissa,
            row.prediction_kind.map_or("none", |k| k.as_str()),
            row.measured().unwrap_or(f64::NAN),
            row.predicted.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
