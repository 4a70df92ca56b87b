//! How detector asymmetry, basis misalignment and dead time move the local
//! bound an honest experiment has to beat.
//!
//!     cargo run --example apparatus_imperfections

use steering::{
    bob_click_probs, bound_sigma, corrected_bound, dead_time_loss_with, detector_asymmetry, max_pairwise_overlap,
    BlochVector, BobApparatus, DeadTimeModel,
};

fn main() -> steering::Result<()> {
    let bob = BobApparatus::lab_replica();
    let asym = bob.asymmetry();
    println!("lab analyzer: eta+ = {:.4}, eta- = {:.4}", bob.eta_plus(), bob.eta_minus());
    println!("  w = {:.4}, delta = {:.5}", asym.w, asym.delta);

    // A state aligned with the measured axis clicks almost only on '+'.
    let p = bob_click_probs(&bob, &BlochVector::Z, &BlochVector::Z);
    println!("  |+z> measured along z: P+ = {:.5}, P- = {:.2e}", p.plus, p.minus);

    // Slightly tilted bases.
    let tilted = [
        BlochVector::direction(1.0, 0.0, 0.0134)?,
        BlochVector::direction(0.0, 1.0, 0.0)?,
        BlochVector::direction(0.0, 0.0, 1.0)?,
    ];
    let eps = max_pairwise_overlap(&tilted)?;
    println!("  tilted triad: epsilon = {eps:.4}");

    println!("\n     w      eps   bound(N=2) bound(N=3)");
    for (w, eps) in [(1.0, 0.0), (1.0115, 0.0), (1.0115, 1.3e-4), (1.0115, 0.0134), (1.05, 0.05)] {
        println!(
            "{w:>6.4} {eps:>8.5} {:>11.5} {:>10.5}",
            corrected_bound(w, eps, 2)?,
            corrected_bound(w, eps, 3)?
        );
    }
    let sigma = bound_sigma(1.0115, 0.0007, 0.0134, 0.0007, 3)?;
    println!("bound(N=3) uncertainty from sigma_w = sigma_eps = 7e-4: {sigma:.4}");

    let a = detector_asymmetry(0.62, 0.60)?;
    println!("\ndetectors at 62% and 60%: w = {:.4}, bound(N=3, eps=0) = {:.4}", a.w, corrected_bound(a.w, 0.0, 3)?);

    println!("\ndead-time loss at 2 us:");
    for rate in [1e3, 1.2e4, 1e5, 4e5] {
        println!(
            "  {:>8.0} Hz: exponential {:.4}, linear {:.4}",
            rate,
            dead_time_loss_with(DeadTimeModel::Exponential, rate, 2e-6),
            dead_time_loss_with(DeadTimeModel::Linear, rate, 2e-6)
        );
    }
    Ok(())
}
