//! Delta-method and bootstrap standard errors side by side.
//!
//!     cargo run --release --example uncertainty

use steering::{
    bootstrap_sigma, make_mub_triad, propagate_poisson_sigma, simulate_experiment, Estimator, ExperimentConfig,
};

fn main() -> steering::Result<()> {
    println!("  events    estimator             value     delta  bootstrap");
    for events in [10_000, 100_000, 1_000_000] {
        let cfg = ExperimentConfig::werner(make_mub_triad(), 0.9678, 0.6175, events, 17)?;
        let tables = simulate_experiment(&cfg)?;
        for est in [Estimator::SteeringParameter, Estimator::Heralding, Estimator::Visibility] {
            let value = est.estimate(&tables)?;
            let delta = propagate_poisson_sigma(&tables, est)?;
            let boot = bootstrap_sigma(&tables, est, 500, 3)?;
            println!("{events:>8}    {:<20} {value:>7.4} {delta:>9.5} {boot:>10.5}", format!("{est:?}"));
        }
    }
    Ok(())
}
