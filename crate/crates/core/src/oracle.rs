//! Brute-force checks of the local-hidden-state bounds.
//!
//! A local-hidden-state (LHS) model sends Bob a definite qubit state `u_lambda`
//! with probability `q_lambda` while Alice's box answers from a classical
//! response table. Nothing here calls into the estimator code in
//! [`analysis`](crate::analysis) except for the closed-form bound the search
//! is compared against.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::corrected_bound;
use crate::apparatus::{bob_click_probs, BobApparatus, DetectorAsymmetry};
use crate::error::{Error, Result};
use crate::montecarlo::stream_rng;
use crate::outcome::AliceOutcome;
use crate::qubit::{BlochVector, MeasurementSet, NORM_TOL};

const SUM_TOL: f64 = 1e-12;

/// Number of Fibonacci-lattice nodes in the coarse sphere search.
pub const SPHERE_GRID_NODES: usize = 20_000;

/// One preparation `lambda` of an LHS model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub weight: f64,
    pub state: BlochVector,
    /// Per setting, `[P(+1), P(-1), P(0)]` for Alice's reported outcome.
    pub responses: Vec<[f64; 3]>,
}

impl HiddenState {
    pub fn new(weight: f64, state: BlochVector, responses: Vec<[f64; 3]>) -> Self {
        HiddenState { weight, state, responses }
    }

    /// Alice's box deterministically reports `outcomes[i]` for setting `i`.
    pub fn deterministic(weight: f64, state: BlochVector, outcomes: &[AliceOutcome]) -> Self {
        let responses = outcomes
            .iter()
            .map(|a| {
                let mut r = [0.0; 3];
                r[a.index()] = 1.0;
                r
            })
            .collect();
        HiddenState { weight, state, responses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLhsModel")]
pub struct LhsModel {
    ensemble: Vec<HiddenState>,
}

#[derive(Deserialize)]
struct RawLhsModel {
    ensemble: Vec<HiddenState>,
}

impl TryFrom<RawLhsModel> for LhsModel {
    type Error = Error;
    fn try_from(raw: RawLhsModel) -> Result<Self> {
        LhsModel::new(raw.ensemble)
    }
}

impl LhsModel {
    pub fn new(ensemble: Vec<HiddenState>) -> Result<Self> {
        let model = LhsModel { ensemble };
        model.validate()?;
        Ok(model)
    }

    /// Single pure state `u`, Alice always answering `+1`.
    pub fn axis_model(u: BlochVector, settings: usize) -> Self {
        LhsModel { ensemble: vec![HiddenState::deterministic(1.0, u, &vec![AliceOutcome::Plus; settings])] }
    }

    pub fn ensemble(&self) -> &[HiddenState] {
        &self.ensemble
    }

    /// Number of settings the response tables cover.
    pub fn settings(&self) -> usize {
        self.ensemble.first().map_or(0, |h| h.responses.len())
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.ensemble.first().ok_or_else(|| Error::invalid("LHS ensemble is empty"))?;
        let settings = first.responses.len();
        let mut weight_sum = 0.0;
        for (k, h) in self.ensemble.iter().enumerate() {
            if !(0.0..=1.0).contains(&h.weight) {
                return Err(Error::invalid(format!("hidden state {k}: weight {} outside [0, 1]", h.weight)));
            }
            weight_sum += h.weight;
            if !h.state.is_finite() || h.state.norm() > 1.0 + NORM_TOL {
                return Err(Error::invalid(format!("hidden state {k}: Bloch vector outside the unit ball")));
            }
            if h.responses.len() != settings {
                return Err(Error::invalid(format!("hidden state {k}: response table length mismatch")));
            }
            for (i, r) in h.responses.iter().enumerate() {
                if r.iter().any(|p| !(0.0..=1.0).contains(p)) || (r.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
                    return Err(Error::invalid(format!("hidden state {k}, setting {i}: invalid response {r:?}")));
                }
            }
        }
        if (weight_sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("LHS weights sum to {weight_sum}, not 1")));
        }
        Ok(())
    }
}

/// Exact steering parameter of an LHS model measured by a given analyzer.
pub fn lhs_steering_parameter_with(model: &LhsModel, bob_set: &MeasurementSet, app: &BobApparatus) -> Result<f64> {
    if model.settings() < bob_set.len() {
        return Err(Error::invalid("LHS model covers fewer settings than Bob measures"));
    }
    let mut total = 0.0;
    for (i, dir) in bob_set.directions().iter().enumerate() {
        // joint[a] = [weight of (a, +1), weight of (a, -1)], not yet normalized.
        let mut joint = [[0.0f64; 2]; 3];
        for h in model.ensemble() {
            let clicks = bob_click_probs(app, dir, &h.state);
            for (row, r) in joint.iter_mut().zip(h.responses[i]) {
                row[0] += h.weight * r * clicks.plus;
                row[1] += h.weight * r * clicks.minus;
            }
        }
        let z: f64 = joint.iter().flatten().sum();
        if z <= 0.0 {
            continue;
        }
        for [plus, minus] in joint {
            let support = plus + minus;
            if support > 0.0 {
                total += (plus - minus).powi(2) / (support * z);
            }
        }
    }
    Ok(total)
}

/// Steering parameter of an LHS model against an analyzer with efficiency ratio
/// `asym.w` (the "+1" detector the stronger one) and beam-displacer transmission `t`.
pub fn lhs_steering_parameter(
    model: &LhsModel,
    bob_set: &MeasurementSet,
    asym: DetectorAsymmetry,
    t: f64,
) -> Result<f64> {
    lhs_steering_parameter_with(model, bob_set, &BobApparatus::from_asymmetry(asym, t)?)
}

/// `w^2 sum_i [delta + (1 - delta)(b_i . u)^2]`, the per-state ceiling on `sum_i <B_i>^2`.
pub fn sphere_objective(bob_set: &MeasurementSet, asym: DetectorAsymmetry, u: &BlochVector) -> f64 {
    let DetectorAsymmetry { w, delta } = asym;
    w * w * bob_set.directions().iter().map(|b| delta + (1.0 - delta) * b.dot(u).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMax {
    pub value: f64,
    pub argmax: BlochVector,
}

/// Nodes of a Fibonacci lattice covering the unit sphere.
pub fn fibonacci_sphere(nodes: usize) -> Vec<BlochVector> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..nodes)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / nodes as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * k as f64;
            BlochVector::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Two unit vectors orthogonal to `u` and to each other.
fn tangent_basis(u: &BlochVector) -> (BlochVector, BlochVector) {
    let helper = if u.x.abs() < 0.9 { BlochVector::X } else { BlochVector::Y };
    let e1 = u.cross(&helper).normalized().expect("helper not parallel to u");
    let e2 = u.cross(&e1);
    (e1, e2)
}

/// Maximize `f` over the unit sphere: Fibonacci-lattice scan, then alternating
/// golden-section line searches along great circles through the incumbent.
pub fn maximize_on_sphere(f: impl Fn(&BlochVector) -> f64 + Sync) -> SphereMax {
    let grid = fibonacci_sphere(SPHERE_GRID_NODES);
    let (mut best_val, mut best) = grid
        .par_iter()
        .map(|u| (f(u), *u))
        .reduce(|| (f64::NEG_INFINITY, BlochVector::Z), |a, b| if b.0 > a.0 { b } else { a });

    let mut radius = 4.0 * (4.0 * std::f64::consts::PI / SPHERE_GRID_NODES as f64).sqrt();
    while radius > 1e-12 {
        let start = best_val;
        let (e1, e2) = tangent_basis(&best);
        for e in [e1, e2] {
            let along = |a: f64| best * a.cos() + e * a.sin();
            let alpha = golden_section_max(|a| f(&along(a)), -radius, radius, radius * 1e-3);
            let candidate = along(alpha).normalized().expect("unit combination");
            let v = f(&candidate);
            if v > best_val {
                best_val = v;
                best = candidate;
            }
        }
        if best_val - start <= 1e-15 {
            radius *= 0.25;
        }
    }
    SphereMax { value: best_val, argmax: best }
}

/// Maximum over pure states of [`sphere_objective`].
pub fn lhs_max_over_sphere(bob_set: &MeasurementSet, asym: DetectorAsymmetry) -> SphereMax {
    maximize_on_sphere(|u| sphere_objective(bob_set, asym, u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub directions: Vec<BlochVector>,
    pub u_star: BlochVector,
    /// `sum_i (b_i . u_star)^2`.
    pub achieved: f64,
}

/// `N` unit vectors with every pairwise dot product equal to `epsilon`, plus the
/// unit vector equidistant from all of them.
pub fn worst_case_directions(n: usize, epsilon: f64) -> Result<WorstCase> {
    if !(2..=3).contains(&n) {
        return Err(Error::invalid(format!("need N = 2 or 3, got {n}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let gram = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { epsilon });
    let min_eig = SymmetricEigen::new(gram.clone()).eigenvalues.min();
    if min_eig < -1e-12 {
        return Err(Error::invalid(format!("Gram matrix not positive semidefinite (eigenvalue {min_eig})")));
    }
    let chol = gram.cholesky().ok_or_else(|| Error::invalid("Gram matrix is singular"))?;
    let l = chol.l();
    let directions: Vec<BlochVector> = (0..n)
        .map(|i| {
            let mut row = [0.0; 3];
            for (j, r) in row.iter_mut().enumerate().take(n) {
                *r = l[(i, j)];
            }
            BlochVector::from_array(row)
        })
        .collect();
    let sum = directions.iter().fold(BlochVector::ZERO, |acc, b| acc + *b);
    let u_star = sum.normalized().ok_or_else(|| Error::invalid("directions sum to zero"))?;
    let achieved = directions.iter().map(|b| b.dot(&u_star).powi(2)).sum();
    Ok(WorstCase { directions, u_star, achieved })
}

fn random_simplex<R: Rng + ?Sized, const K: usize>(rng: &mut R) -> [f64; K] {
    let raw: [f64; K] = std::array::from_fn(|_| Exp1.sample(rng));
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

fn random_in_ball<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let g = BlochVector::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        if let Some(dir) = g.normalized() {
            return dir * rng.random::<f64>().cbrt();
        }
    }
}

/// A random LHS model: 1 to 8 hidden states uniform in the Bloch ball, flat
/// Dirichlet weights, and flat Dirichlet response triples per setting.
pub fn random_lhs_model<R: Rng + ?Sized>(rng: &mut R, settings: usize) -> LhsModel {
    let k = rng.random_range(1..=8usize);
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let norm: f64 = raw.iter().sum();
    let ensemble = raw
        .into_iter()
        .map(|q| {
            let state = random_in_ball(rng);
            let responses = (0..settings).map(|_| random_simplex::<_, 3>(rng)).collect();
            HiddenState::new(q / norm, state, responses)
        })
        .collect();
    LhsModel { ensemble }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n_models: usize,
    pub max_value: f64,
    /// Index of the first model achieving `max_value`.
    pub argmax_index: usize,
    pub bound: f64,
    pub exceeded: bool,
}

/// Largest steering parameter over `models`, each scored against both detector
/// orientations of the analyzer. Ties resolve to the lowest index.
pub fn max_over_models(models: &[LhsModel], bob_set: &MeasurementSet, app: &BobApparatus) -> Result<(f64, usize)> {
    if models.is_empty() {
        return Err(Error::invalid("no models to evaluate"));
    }
    let mirrored = app.mirrored();
    let scores = models
        .par_iter()
        .map(|m| {
            Ok(lhs_steering_parameter_with(m, bob_set, app)?.max(lhs_steering_parameter_with(m, bob_set, &mirrored)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().enumerate().fold((f64::NEG_INFINITY, 0), |best, (i, &s)| if s > best.0 { (s, i) } else { best }))
}

/// Evaluate `n_models` random LHS models and report the largest steering
/// parameter next to the corrected bound for this geometry. Model `k` is drawn
/// from its own RNG stream, so the result is independent of thread count.
pub fn random_lhs_sweep(
    bob_set: &MeasurementSet,
    asym: DetectorAsymmetry,
    t: f64,
    n_models: usize,
    seed: u64,
) -> Result<SweepSummary> {
    if n_models == 0 {
        return Err(Error::invalid("n_models must be at least 1"));
    }
    let app = BobApparatus::from_asymmetry(asym, t)?;
    let n = bob_set.len();
    let models: Vec<LhsModel> =
        (0..n_models).into_par_iter().map(|k| random_lhs_model(&mut stream_rng(seed, k as u64), n)).collect();
    let (max_value, argmax_index) = max_over_models(&models, bob_set, &app)?;
    let bound = corrected_bound(asym.w, bob_set.epsilon(), n)?;
    Ok(SweepSummary { n_models, max_value, argmax_index, bound, exceeded: max_value > bound + 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::make_mub_triad;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn xy() -> MeasurementSet {
        make_mub_triad().truncated(2).unwrap()
    }

    #[test]
    fn axis_model_saturates_ideal_bound() {
        let model = LhsModel::axis_model(BlochVector::Z, 3);
        let s = lhs_steering_parameter(&model, &make_mub_triad(), DetectorAsymmetry::ideal(), 1.0).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-15);
        let s = lhs_steering_parameter(&model, &xy(), DetectorAsymmetry::ideal(), 1.0).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sign_reporting_mixture_saturates_ideal_bound() {
        let plus = [AliceOutcome::Plus; 3];
        let minus = [AliceOutcome::Minus; 3];
        let model = LhsModel::new(vec![
            HiddenState::deterministic(0.5, BlochVector::Z, &plus),
            HiddenState::deterministic(0.5, -BlochVector::Z, &minus),
        ])
        .unwrap();
        let s = lhs_steering_parameter(&model, &make_mub_triad(), DetectorAsymmetry::ideal(), 1.0).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_hidden_state_term_is_squared_expectation() {
        // With one lambda, every Alice outcome leaves Bob with the same state, so
        // each setting contributes <B_i>^2 of that state whatever Alice reports.
        let app = BobApparatus::new(0.999, 0.8, 0.65, 0.0).unwrap();
        let u = BlochVector::state(0.2, -0.5, 0.4).unwrap();
        let model = LhsModel::new(vec![HiddenState::new(1.0, u, vec![[0.1, 0.3, 0.6], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0]])])
            .unwrap();
        let set = make_mub_triad();
        let expected: f64 = set.directions().iter().map(|b| bob_click_probs(&app, b, &u).expectation().powi(2)).sum();
        assert_abs_diff_eq!(lhs_steering_parameter_with(&model, &set, &app).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn model_validation() {
        assert!(LhsModel::new(vec![]).is_err());
        assert!(LhsModel::new(vec![HiddenState::new(0.5, BlochVector::Z, vec![[1.0, 0.0, 0.0]])]).is_err());
        assert!(LhsModel::new(vec![HiddenState::new(1.0, BlochVector::new(0.0, 0.0, 1.5), vec![[1.0, 0.0, 0.0]])])
            .is_err());
        assert!(LhsModel::new(vec![HiddenState::new(1.0, BlochVector::Z, vec![[0.7, 0.0, 0.0]])]).is_err());
        let json = r#"{"ensemble":[{"weight":1.0,"state":{"x":0,"y":0,"z":1},"responses":[[0.5,0.5,0.0]]}]}"#;
        assert!(serde_json::from_str::<LhsModel>(json).is_ok());
        let bad = json.replace("0.5,0.5,0.0", "0.5,0.6,0.0");
        assert!(serde_json::from_str::<LhsModel>(&bad).is_err());
    }

    #[test]
    fn sphere_max_on_mub_triad() {
        let m = lhs_max_over_sphere(&make_mub_triad(), DetectorAsymmetry::ideal());
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 1e-12);

        let asym = DetectorAsymmetry::from_ratio(1.0115).unwrap();
        let (w, d) = (asym.w, asym.delta);
        let at_axis = w * w * (2.0 * d + (1.0 - d) + d);
        let sym = BlochVector::direction(1.0, 1.0, 1.0).unwrap();
        let at_symmetric = w * w * (3.0 * d + (1.0 - d) * 3.0 * (1.0 / 3.0));
        let m = lhs_max_over_sphere(&make_mub_triad(), asym);
        assert_abs_diff_eq!(m.value, at_axis.max(at_symmetric), epsilon = 1e-12);
        assert_abs_diff_eq!(sphere_objective(&make_mub_triad(), asym, &sym), at_symmetric, epsilon = 1e-12);
    }

    #[test]
    fn sphere_max_on_skewed_triad() {
        let wc = worst_case_directions(3, 0.0134).unwrap();
        let set = MeasurementSet::new(wc.directions).unwrap();
        let m = lhs_max_over_sphere(&set, DetectorAsymmetry::ideal());
        assert_abs_diff_eq!(m.value, 1.0268, epsilon = 1e-10);
        assert_abs_diff_eq!(m.argmax.dot(&wc.u_star).abs(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn worst_case_examples() {
        let wc = worst_case_directions(3, 0.0).unwrap();
        assert_eq!(wc.directions, vec![BlochVector::X, BlochVector::Y, BlochVector::Z]);
        assert_abs_diff_eq!(wc.achieved, 1.0, epsilon = 1e-12);

        let wc = worst_case_directions(3, 0.0134).unwrap();
        assert_abs_diff_eq!(wc.achieved, 1.0268, epsilon = 1e-10);
        for i in 0..3 {
            assert_abs_diff_eq!(wc.directions[i].norm(), 1.0, epsilon = 1e-14);
            for j in (i + 1)..3 {
                assert_abs_diff_eq!(wc.directions[i].dot(&wc.directions[j]), 0.0134, epsilon = 1e-14);
            }
        }

        let wc = worst_case_directions(2, 1.3e-4).unwrap();
        assert_abs_diff_eq!(wc.achieved, 1.00013, epsilon = 1e-10);

        assert!(worst_case_directions(3, 1.0).is_err());
        assert!(worst_case_directions(3, -0.1).is_err());
        assert!(worst_case_directions(4, 0.1).is_err());
    }

    #[test]
    fn sweep_with_single_model_is_its_value() {
        let model = LhsModel::axis_model(BlochVector::Z, 3);
        let app = BobApparatus::ideal();
        let set = make_mub_triad();
        let (max, idx) = max_over_models(std::slice::from_ref(&model), &set, &app).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(max, lhs_steering_parameter_with(&model, &set, &app).unwrap());
    }

    #[test]
    fn sweep_is_deterministic() {
        let set = make_mub_triad();
        let asym = DetectorAsymmetry::from_ratio(1.0115).unwrap();
        let a = random_lhs_sweep(&set, asym, 0.99999, 500, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| random_lhs_sweep(&set, asym, 0.99999, 500, 9).unwrap());
        assert_eq!(a, b);
        assert!(!a.exceeded);
        assert!(random_lhs_sweep(&set, asym, 0.99999, 0, 9).is_err());
    }

    #[test]
    fn random_models_are_valid() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..200 {
            let m = random_lhs_model(&mut rng, 3);
            m.validate().unwrap();
            assert!((1..=8).contains(&m.ensemble().len()));
        }
    }

    fn arb_unit() -> impl Strategy<Value = BlochVector> {
        (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
            .prop_map(|(t, p)| BlochVector::from_spherical(t, p))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_models_respect_corrected_bound(
            seed in any::<u64>(),
            dirs in prop::collection::vec(arb_unit(), 2..=3),
            w in 1.0..1.2f64,
            t in 0.9..=1.0f64,
        ) {
            prop_assume!(dirs.windows(2).all(|p| p[0].dot(&p[1]).abs() < 0.95));
            let set = MeasurementSet::new(dirs).unwrap();
            prop_assume!(set.epsilon() < 0.95);
            let asym = DetectorAsymmetry::from_ratio(w).unwrap();
            let app = BobApparatus::from_asymmetry(asym, t).unwrap();
            let bound = corrected_bound(w, set.epsilon(), set.len()).unwrap();
            let mut rng = stream_rng(seed, 0);
            for _ in 0..20 {
                let m = random_lhs_model(&mut rng, set.len());
                let s = lhs_steering_parameter_with(&m, &set, &app).unwrap()
                    .max(lhs_steering_parameter_with(&m, &set, &app.mirrored()).unwrap());
                prop_assert!(s <= bound + 1e-9, "S = {s} > bound {bound}");
            }
        }

        #[test]
        fn sphere_max_dominates_axes_and_matches_eigenvalue(
            dirs in prop::collection::vec(arb_unit(), 2..=3),
            w in 1.0..1.1f64,
        ) {
            let set = MeasurementSet::new(dirs).unwrap();
            let asym = DetectorAsymmetry::from_ratio(w).unwrap();
            let m = lhs_max_over_sphere(&set, asym);
            for b in set.directions() {
                prop_assert!(m.value >= sphere_objective(&set, asym, b) - 1e-4);
            }
            // Independent check: the quadratic form's top eigenvalue.
            let mat = nalgebra::Matrix3::from_fn(|i, j| {
                set.directions().iter().map(|b| b.to_array()[i] * b.to_array()[j]).sum::<f64>()
            });
            let top = SymmetricEigen::new(mat).eigenvalues.max();
            let exact = w * w * (set.len() as f64 * asym.delta + (1.0 - asym.delta) * top);
            prop_assert!((m.value - exact).abs() <= 1e-9, "grid {} vs eigen {}", m.value, exact);
            prop_assert!(m.value <= corrected_bound(w, set.epsilon(), set.len()).unwrap() + 1e-12);
        }
    }
}
