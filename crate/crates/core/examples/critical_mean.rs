//! At k = k0 the reflected packet loses its peak shift but keeps a mean
//! shift that grows linearly with τ. This example measures it on a grid of
//! evolution times and fits the line.

use ghshift::experiments::{critical_linearity_fit, run_scan, ScanConfig};

fn main() -> ghshift::Result<()> {
    let mut config = ScanConfig::critical_linearity(500.0);
    config.evolution_values = vec![0.5, 1.0, 1.5, 2.0, 3.0];
    let rows = run_scan(&config)?;
    for row in &rows {
        println!(
            "tau={:3.1}  mean {:+.6}  predicted {:+.6}",
            row.evolution,
            row.measured_mean.unwrap_or(f64::NAN),
            row.predicted.unwrap_or(f64::NAN)
        );
    }
    let fit = critical_linearity_fit(&rows)?;
    println!(
        "fit: slope {:.6}  intercept {:.6}  max residual {:.2e}",
        fit.slope, fit.intercept, fit.max_residual
    );
    println!(
        "closed-form coefficient C = {:.16}",
        ghshift::analytic::critical_coefficient()
    );
    Ok(())
}
