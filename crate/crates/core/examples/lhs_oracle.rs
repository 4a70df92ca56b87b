//! Local-hidden-state adversaries: the best single-state cheat, the geometry
//! that saturates the misalignment term, and a random sweep.
//!
//!     cargo run --release --example lhs_oracle

use steering::oracle::{lhs_steering_parameter_with, maximize_on_sphere, sphere_objective};
use steering::{
    corrected_bound, lhs_max_over_sphere, lhs_steering_parameter, make_mub_triad, random_lhs_sweep,
    worst_case_directions, BlochVector, BobApparatus, DetectorAsymmetry, LhsModel, MeasurementSet,
};

fn main() -> steering::Result<()> {
    let mub = make_mub_triad();
    let axis = LhsModel::axis_model(BlochVector::Z, 3);
    println!("axis model on the ideal triad: S = {:.6}", lhs_steering_parameter(&axis, &mub, DetectorAsymmetry::ideal(), 1.0)?);

    // With unequal detectors the best pure-state cheat reaches the eps = 0 bound exactly.
    let asym = DetectorAsymmetry::from_ratio(1.0115)?;
    let sphere = lhs_max_over_sphere(&mub, asym);
    println!("best pure state against w = 1.0115: S = {:.6} at {:?}", sphere.value, sphere.argmax.to_array());

    let wc = worst_case_directions(3, 0.0134)?;
    let set = MeasurementSet::new(wc.directions.clone())?;
    let grid = maximize_on_sphere(|u| sphere_objective(&set, DetectorAsymmetry::ideal(), u));
    println!("\nworst-case triad with eps = 0.0134:");
    for d in set.directions() {
        println!("  ({:+.5}, {:+.5}, {:+.5})", d.x, d.y, d.z);
    }
    println!("  exact {:.6}, grid search {:.6}, 1 + 2 eps = {:.6}", wc.achieved, grid.value, 1.0 + 2.0 * 0.0134);
    let single = LhsModel::axis_model(wc.u_star, 3);
    println!("  axis model along u*: {:.6}", lhs_steering_parameter_with(&single, &set, &BobApparatus::ideal())?);

    let bound = corrected_bound(1.0115, 0.0134, 3)?;
    let sweep = random_lhs_sweep(&set, asym, 1.0 - 1e-5, 5_000, 1)?;
    println!(
        "\n{} random models: max S = {:.6} (model {}), bound {:.6}, exceeded: {}",
        sweep.n_models, sweep.max_value, sweep.argmax_index, bound, sweep.exceeded
    );
    Ok(())
}
