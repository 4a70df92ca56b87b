//! Steered states of a Werner pair and the ideal steering parameter as a
//! function of visibility and heralding efficiency.
//!
//!     cargo run --example werner_steering

use steering::{
    joint_distribution, make_mub_triad, steered_bloch, steering_parameter, werner_threshold, ExperimentConfig, Sign,
    TwoQubitState,
};

fn main() -> steering::Result<()> {
    let state = TwoQubitState::werner(0.9)?;
    let set = make_mub_triad();

    println!("steered Bloch vectors at V = 0.9");
    for (i, dir) in set.directions().iter().enumerate() {
        for sign in Sign::ALL {
            let b = steered_bloch(&state, dir, sign)?;
            println!("  setting {i}, a = {:+}: ({:+.3}, {:+.3}, {:+.3})", sign.value(), b.x, b.y, b.z);
        }
    }

    println!("\n   eta      V     S_3   3 eta V^2");
    for (eta, v) in [(1.0, 1.0), (0.6175, 0.9678), (0.5, 0.8), (0.3, 0.95)] {
        let cfg = ExperimentConfig::werner(set.clone(), v, eta, 1, 0)?;
        let dists = (0..set.len()).map(|i| joint_distribution(&cfg, i)).collect::<Result<Vec<_>, _>>()?;
        let s = steering_parameter(&dists)?;
        println!("{eta:>6.4} {v:>6.4} {s:>7.4} {:>11.4}", 3.0 * eta * v * v);
    }

    // Smallest visibility that beats the ideal bound of 1.
    println!();
    for n in [2, 3] {
        for eta in [0.34, 0.5, 0.75, 1.0] {
            match werner_threshold(n, eta)?.visibility() {
                Some(v) => println!("N = {n}, eta = {eta:.2}: V_min = {v:.4}"),
                None => println!("N = {n}, eta = {eta:.2}: unreachable"),
            }
        }
    }
    Ok(())
}
