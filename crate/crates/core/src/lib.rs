//! Simulation and analysis of a detection-loophole-free quantum steering test.
//!
//! Alice holds an untrusted black box that answers `+1`, `-1` or `0`
//! (inconclusive); Bob holds a characterized polarization analyzer. For `N = 2`
//! or `3` settings the steering parameter
//!
//! ```text
//! S_N = sum_i sum_{a = +1,-1,0} P(A_i = a) <B_i>_{A_i = a}^2
//! ```
//!
//! is bounded by 1 for every local-hidden-state model when Bob measures
//! mutually unbiased qubit observables, and by
//! `w^2 [1 + (N-1)(delta + eps - delta eps)]` once Bob's detector-efficiency
//! ratio `w` and direction nonorthogonality `eps` are accounted for. Because
//! inconclusive outcomes stay in the sum, losses on Alice's side cannot be
//! used to fake a violation.
//!
//! Modules:
//!
//! - [`qubit`]: Bloch vectors, Werner and general two-qubit states, steered states.
//! - [`apparatus`]: Bob's click model, detector asymmetry, dead-time loss, Alice's device.
//! - [`montecarlo`]: exact joint distributions and Poissonian count tables.
//! - [`analysis`]: `S_N`, corrected bound, delta-method and bootstrap errors, significance.
//! - [`oracle`]: brute-force LHS searches that check every bound independently.
//! - [`io`] and [`runs`]: CSV/JSON formats and the runs behind the `steering` binary.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod analysis;
pub mod apparatus;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod oracle;
pub mod outcome;
pub mod qubit;
pub mod runs;

pub use analysis::{
    analyze, bootstrap_sigma, bound_sigma, conditional_expectation, corrected_bound, heralding_and_visibility,
    propagate_poisson_sigma, setting_term, steering_parameter, violation_significance, violation_significance_with,
    werner_threshold, BoundParams, Estimator, SignificanceMode, SteeringReport, WernerThreshold,
};
pub use apparatus::{
    bob_click_probs, dead_time_loss, dead_time_loss_with, detector_asymmetry, AliceDevice, BobApparatus, ClickProbs,
    DeadTime, DeadTimeModel, DetectorAsymmetry,
};
pub use error::{Error, Result};
pub use montecarlo::{
    joint_distribution, sample_counts, simulate_experiment, CellView, CountTable, ExperimentConfig, JointDistribution,
};
pub use oracle::{
    lhs_max_over_sphere, lhs_steering_parameter, random_lhs_sweep, worst_case_directions, HiddenState, LhsModel,
};
pub use outcome::{AliceOutcome, Sign};
pub use qubit::{make_mub_triad, max_pairwise_overlap, steered_bloch, BlochVector, MeasurementSet, TwoQubitState};
