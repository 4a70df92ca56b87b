//! Exact joint outcome distributions for a configured experiment, and Poissonian
//! count tables sampled from them.
//!
//! Every distribution is conditioned on Bob registering a conclusive event;
//! trials where neither of Bob's detectors fires never reach a table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::{bob_click_probs, dead_time_loss_with, AliceDevice, BobApparatus, DeadTime, DeadTimeModel};
use crate::error::{Error, Result};
use crate::outcome::{AliceOutcome, Sign};
use crate::qubit::{steered_bloch, MeasurementSet, TwoQubitState};

/// Read access to a 3x2 table of (possibly fractional) event weights, rows `a = +1, -1, 0`
/// and columns `b = +1, -1`.
pub trait CellView {
    fn cell(&self, a: AliceOutcome, b: Sign) -> f64;

    fn setting(&self) -> usize {
        0
    }

    fn cells(&self) -> [[f64; 2]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.cell(AliceOutcome::ALL[i], Sign::ALL[j])))
    }

    fn total(&self) -> f64 {
        self.cells().iter().flatten().sum()
    }
}

impl CellView for [[f64; 2]; 3] {
    fn cell(&self, a: AliceOutcome, b: Sign) -> f64 {
        self[a.index()][b.index()]
    }
}

/// `P(A_i = a, B_i = b)` for one setting, conditioned on Bob detecting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub setting: usize,
    pub probs: [[f64; 2]; 3],
}

impl JointDistribution {
    pub fn get(&self, a: AliceOutcome, b: Sign) -> f64 {
        self.probs[a.index()][b.index()]
    }

    /// Alice-marginal `P(A = a)`.
    pub fn alice_marginal(&self, a: AliceOutcome) -> f64 {
        self.probs[a.index()].iter().sum()
    }

    /// Bob-marginal `P(B = b)`.
    pub fn bob_marginal(&self, b: Sign) -> f64 {
        self.probs.iter().map(|row| row[b.index()]).sum()
    }

    /// Replace a fraction `p` of Bob's results by a fair coin flip.
    fn with_random_bob_fraction(&self, p: f64) -> JointDistribution {
        let mut probs = self.probs;
        for row in probs.iter_mut() {
            let marginal = row[0] + row[1];
            for cell in row.iter_mut() {
                *cell = (1.0 - p) * *cell + p * 0.5 * marginal;
            }
        }
        JointDistribution { setting: self.setting, probs }
    }
}

impl CellView for JointDistribution {
    fn cell(&self, a: AliceOutcome, b: Sign) -> f64 {
        self.get(a, b)
    }

    fn setting(&self) -> usize {
        self.setting
    }
}

/// Per-setting joint counts `n(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CountTable {
    pub setting: usize,
    pub counts: [[u64; 2]; 3],
}

impl CountTable {
    pub fn new(setting: usize) -> Self {
        CountTable { setting, counts: [[0; 2]; 3] }
    }

    pub fn get(&self, a: AliceOutcome, b: Sign) -> u64 {
        self.counts[a.index()][b.index()]
    }

    pub fn set(&mut self, a: AliceOutcome, b: Sign, n: u64) {
        self.counts[a.index()][b.index()] = n;
    }

    pub fn add(&mut self, a: AliceOutcome, b: Sign, n: u64) {
        self.counts[a.index()][b.index()] += n;
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Events where Alice reported a conclusive result.
    pub fn conclusive_count(&self) -> u64 {
        self.counts[..2].iter().flatten().sum()
    }

    /// Every cell multiplied by `k`.
    pub fn scaled(&self, k: u64) -> CountTable {
        let mut out = *self;
        out.counts.iter_mut().flatten().for_each(|n| *n *= k);
        out
    }
}

impl CellView for CountTable {
    fn cell(&self, a: AliceOutcome, b: Sign) -> f64 {
        self.get(a, b) as f64
    }

    fn setting(&self) -> usize {
        self.setting
    }
}

fn default_stream_batches() -> u64 {
    1
}

/// Everything needed to reproduce a simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub state: TwoQubitState,
    pub bob_set: MeasurementSet,
    pub alice: AliceDevice,
    pub bob: BobApparatus,
    /// Expected number of Bob-conclusive events per setting.
    pub events_per_setting: u64,
    pub seed: u64,
    /// Optional rate-dependent loss on Alice's detectors, folded into her heralding efficiency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_dead_time: Option<DeadTime>,
    #[serde(default)]
    pub dead_time_model: DeadTimeModel,
    /// Number of independent RNG streams each setting's expected total is split across.
    #[serde(default = "default_stream_batches")]
    pub batches: u64,
}

impl ExperimentConfig {
    /// Werner state of the given visibility, honest Alice measuring Bob's axes with
    /// heralding efficiency `heralding`, ideal analyzer on Bob's side.
    pub fn werner(
        bob_set: MeasurementSet,
        visibility: f64,
        heralding: f64,
        events_per_setting: u64,
        seed: u64,
    ) -> Result<Self> {
        let alice = AliceDevice::honest(heralding, bob_set.directions().to_vec())?;
        let config = ExperimentConfig {
            state: TwoQubitState::werner(visibility)?,
            bob_set,
            alice,
            bob: BobApparatus::ideal(),
            events_per_setting,
            seed,
            alice_dead_time: None,
            dead_time_model: DeadTimeModel::default(),
            batches: 1,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_bob(mut self, bob: BobApparatus) -> Self {
        self.bob = bob;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.events_per_setting == 0 {
            return Err(Error::invalid("events_per_setting must be at least 1"));
        }
        if self.batches == 0 {
            return Err(Error::invalid("batches must be at least 1"));
        }
        self.alice.validate()?;
        let n = self.bob_set.len();
        match &self.alice {
            AliceDevice::Honest { directions, .. } if directions.len() != n => Err(Error::invalid(format!(
                "Alice has {} directions but Bob has {n} settings",
                directions.len()
            ))),
            AliceDevice::Adversarial(model) if model.settings() < n => Err(Error::invalid(format!(
                "LHS model covers {} settings but Bob has {n}",
                model.settings()
            ))),
            _ => Ok(()),
        }
    }

    /// Alice's heralding efficiency after dead-time loss, for an honest device.
    pub fn effective_heralding(&self) -> Option<f64> {
        match &self.alice {
            AliceDevice::Honest { heralding, .. } => {
                let loss = self
                    .alice_dead_time
                    .map(|d| dead_time_loss_with(self.dead_time_model, d.singles_rate_hz, d.dead_time_s))
                    .unwrap_or(0.0);
                Some(heralding * (1.0 - loss))
            }
            AliceDevice::Adversarial(_) => None,
        }
    }
}

/// Distribution over single-click events only: before double clicks are randomized.
fn single_click_distribution(config: &ExperimentConfig, setting: usize) -> Result<JointDistribution> {
    let n = config.bob_set.len();
    if setting >= n {
        return Err(Error::invalid(format!("setting {setting} out of range for {n} settings")));
    }
    let bob_dir = config.bob_set.directions()[setting];
    let mut raw = [[0.0; 2]; 3];
    match &config.alice {
        AliceDevice::Honest { directions, .. } => {
            let eta = config.effective_heralding().unwrap_or(0.0);
            let alice_dir = directions[setting];
            for s in Sign::ALL {
                let p_alice = config.state.alice_outcome_probability(&alice_dir, s);
                if p_alice <= 0.0 {
                    continue;
                }
                let steered = steered_bloch(&config.state, &alice_dir, s)?;
                let clicks = bob_click_probs(&config.bob, &bob_dir, &steered);
                let row = AliceOutcome::from(s).index();
                raw[row] = [eta * p_alice * clicks.plus, eta * p_alice * clicks.minus];
            }
            // Inconclusive trials leave Bob with his reduced state.
            let clicks = bob_click_probs(&config.bob, &bob_dir, &config.state.bob_local());
            raw[AliceOutcome::Inconclusive.index()] = [(1.0 - eta) * clicks.plus, (1.0 - eta) * clicks.minus];
        }
        AliceDevice::Adversarial(model) => {
            for hidden in model.ensemble() {
                let clicks = bob_click_probs(&config.bob, &bob_dir, &hidden.state);
                for a in AliceOutcome::ALL {
                    let r = hidden.weight * hidden.responses[setting][a.index()];
                    raw[a.index()][0] += r * clicks.plus;
                    raw[a.index()][1] += r * clicks.minus;
                }
            }
        }
    }
    let z: f64 = raw.iter().flatten().sum();
    if z <= 0.0 {
        return Err(Error::DegenerateConditioning { denominator: z });
    }
    raw.iter_mut().flatten().for_each(|p| *p /= z);
    Ok(JointDistribution { setting, probs: raw })
}

/// Exact `P(a, b)` for one setting, conditioned on Bob detecting, with double clicks
/// already replaced by fair coin flips.
pub fn joint_distribution(config: &ExperimentConfig, setting: usize) -> Result<JointDistribution> {
    Ok(single_click_distribution(config, setting)?.with_random_bob_fraction(config.bob.double_click_prob()))
}

fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Draw each cell independently as `Poisson(expected_total * P(a, b))`.
pub fn sample_counts_with<R: Rng + ?Sized>(dist: &JointDistribution, expected_total: u64, rng: &mut R) -> CountTable {
    let mut table = CountTable::new(dist.setting);
    for a in AliceOutcome::ALL {
        for b in Sign::ALL {
            table.set(a, b, poisson_draw(rng, expected_total as f64 * dist.get(a, b)));
        }
    }
    table
}

pub fn sample_counts(dist: &JointDistribution, expected_total: u64, seed: u64) -> CountTable {
    sample_counts_with(dist, expected_total, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Independent RNG for one `(setting, batch)` pair of a run.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_setting(config: &ExperimentConfig, setting: usize) -> Result<CountTable> {
    let single = single_click_distribution(config, setting)?;
    let p_double = config.bob.double_click_prob();
    let mut table = CountTable::new(setting);
    let per_batch = config.events_per_setting as f64 / config.batches as f64;
    for batch in 0..config.batches {
        let mut rng = stream_rng(config.seed, ((setting as u64) << 32) | batch);
        for a in AliceOutcome::ALL {
            for b in Sign::ALL {
                let mean = per_batch * (1.0 - p_double) * single.get(a, b);
                table.add(a, b, poisson_draw(&mut rng, mean));
            }
            // Double clicks: Bob reports a fair coin flip.
            let doubles = poisson_draw(&mut rng, per_batch * p_double * single.alice_marginal(a));
            if doubles > 0 {
                let heads = Binomial::new(doubles, 0.5).expect("valid binomial").sample(&mut rng);
                table.add(a, Sign::Plus, heads);
                table.add(a, Sign::Minus, doubles - heads);
            }
        }
    }
    Ok(table)
}

/// One count table per setting. Settings and batches draw from disjoint RNG streams,
/// so the output depends only on the config.
pub fn simulate_experiment(config: &ExperimentConfig) -> Result<Vec<CountTable>> {
    config.validate()?;
    (0..config.bob_set.len()).into_par_iter().map(|i| sample_setting(config, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HiddenState, LhsModel};
    use crate::qubit::{make_mub_triad, BlochVector};
    use approx::assert_abs_diff_eq;

    fn werner_config(v: f64, eta: f64) -> ExperimentConfig {
        ExperimentConfig::werner(make_mub_triad(), v, eta, 1000, 7).unwrap()
    }

    #[test]
    fn singlet_perfect_anticorrelation() {
        let cfg = werner_config(1.0, 1.0);
        let d = joint_distribution(&cfg, 2).unwrap();
        assert_abs_diff_eq!(d.get(AliceOutcome::Plus, Sign::Minus), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(AliceOutcome::Minus, Sign::Plus), 0.5, epsilon = 1e-15);
        for (a, b) in [
            (AliceOutcome::Plus, Sign::Plus),
            (AliceOutcome::Minus, Sign::Minus),
            (AliceOutcome::Inconclusive, Sign::Plus),
            (AliceOutcome::Inconclusive, Sign::Minus),
        ] {
            assert_abs_diff_eq!(d.get(a, b), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn werner_closed_form() {
        let (v, eta) = (0.9678, 0.6175);
        let cfg = werner_config(v, eta);
        for i in 0..3 {
            let d = joint_distribution(&cfg, i).unwrap();
            assert_abs_diff_eq!(d.get(AliceOutcome::Plus, Sign::Minus), 0.303_779_125, epsilon = 1e-12);
            assert_abs_diff_eq!(d.get(AliceOutcome::Inconclusive, Sign::Plus), 0.19125, epsilon = 1e-12);
            for a in [AliceOutcome::Plus, AliceOutcome::Minus] {
                for b in Sign::ALL {
                    let ab = f64::from(a.value() * b.value());
                    assert_abs_diff_eq!(d.get(a, b), eta * (1.0 - ab * v) / 4.0, epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        }
        assert!(joint_distribution(&cfg, 3).is_err());
    }

    #[test]
    fn adversarial_deterministic_state_follows_click_model() {
        let app = BobApparatus::new(0.999, 0.9, 0.7, 0.0).unwrap();
        let u = BlochVector::state(0.3, -0.2, 0.6).unwrap();
        let model = LhsModel::new(vec![HiddenState::new(1.0, u, vec![[0.2, 0.5, 0.3]; 3])]).unwrap();
        let mut cfg = werner_config(0.5, 0.5).with_bob(app);
        cfg.alice = AliceDevice::Adversarial(model);
        for i in 0..3 {
            let d = joint_distribution(&cfg, i).unwrap();
            let clicks = bob_click_probs(&app, &make_mub_triad().directions()[i], &u);
            assert_abs_diff_eq!(d.bob_marginal(Sign::Plus), clicks.plus / clicks.total(), epsilon = 1e-14);
            assert_abs_diff_eq!(d.alice_marginal(AliceOutcome::Minus), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn no_signalling_from_alice_setting() {
        let t = [[-0.7, 0.1, 0.0], [0.05, -0.6, 0.2], [0.0, 0.1, -0.8]];
        let state = TwoQubitState::new(BlochVector::new(0.1, 0.0, 0.1), BlochVector::new(0.0, 0.15, -0.05), t).unwrap();
        let bob = BobApparatus::new(0.995, 0.8, 0.7, 0.0).unwrap();
        let base = ExperimentConfig { state, ..werner_config(1.0, 0.6).with_bob(bob) };
        let alt_dirs = vec![
            BlochVector::direction(1.0, 1.0, 0.0).unwrap(),
            BlochVector::direction(0.0, -1.0, 2.0).unwrap(),
            BlochVector::direction(0.3, 0.2, -1.0).unwrap(),
        ];
        let alt = ExperimentConfig { alice: AliceDevice::honest(0.6, alt_dirs).unwrap(), ..base.clone() };
        for i in 0..3 {
            let d1 = joint_distribution(&base, i).unwrap();
            let d2 = joint_distribution(&alt, i).unwrap();
            for b in Sign::ALL {
                assert_abs_diff_eq!(d1.bob_marginal(b), d2.bob_marginal(b), epsilon = 1e-12);
            }
            let conclusive: f64 = d1.probs[..2].iter().flatten().sum();
            assert_abs_diff_eq!(conclusive, 0.6, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_clicks_dilute_correlations() {
        let bob = BobApparatus::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let cfg = werner_config(1.0, 1.0).with_bob(bob);
        let d = joint_distribution(&cfg, 0).unwrap();
        assert_abs_diff_eq!(d.get(AliceOutcome::Plus, Sign::Minus), 0.5 * 0.9 + 0.1 * 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(AliceOutcome::Plus, Sign::Plus), 0.1 * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn dead_time_reduces_heralding() {
        let mut cfg = werner_config(1.0, 0.8);
        cfg.alice_dead_time = Some(DeadTime { singles_rate_hz: 12_000.0, dead_time_s: 2e-6 });
        let eta = cfg.effective_heralding().unwrap();
        assert_abs_diff_eq!(eta, 0.8 * (-0.024f64).exp(), epsilon = 1e-15);
        let d = joint_distribution(&cfg, 0).unwrap();
        assert_abs_diff_eq!(d.alice_marginal(AliceOutcome::Inconclusive), 1.0 - eta, epsilon = 1e-12);
    }

    #[test]
    fn concentrated_distribution_samples_one_cell() {
        let mut probs = [[0.0; 2]; 3];
        probs[0][1] = 1.0;
        let t = sample_counts(&JointDistribution { setting: 0, probs }, 1000, 3);
        assert_eq!(t.total_count(), t.get(AliceOutcome::Plus, Sign::Minus));
        assert!((t.total_count() as f64 - 1000.0).abs() < 5.0 * 1000f64.sqrt());
    }

    #[test]
    fn poisson_cells_have_matching_mean_and_variance() {
        let cfg = werner_config(0.9, 0.6);
        let d = joint_distribution(&cfg, 0).unwrap();
        let reps = 10_000usize;
        let expected_total = 500u64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<CountTable> = (0..reps).map(|_| sample_counts_with(&d, expected_total, &mut rng)).collect();

        let totals: Vec<f64> = draws.iter().map(|t| t.total_count() as f64).collect();
        let mean_total = totals.iter().sum::<f64>() / reps as f64;
        let se_total = (expected_total as f64 / reps as f64).sqrt();
        assert!((mean_total - expected_total as f64).abs() < 5.0 * se_total);

        for a in AliceOutcome::ALL {
            for b in Sign::ALL {
                let lambda = expected_total as f64 * d.get(a, b);
                let xs: Vec<f64> = draws.iter().map(|t| t.cell(a, b)).collect();
                let mean = xs.iter().sum::<f64>() / reps as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                // Var of the sample variance of a Poisson: (lambda + 2 lambda^2 (n/(n-1))) / n.
                let se_var = ((lambda + 2.0 * lambda * lambda) / reps as f64).sqrt();
                assert!((var - mean).abs() < 5.0 * se_var, "cell ({a:?},{b:?}) var {var} mean {mean}");
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = werner_config(0.95, 0.62);
        assert_eq!(simulate_experiment(&cfg).unwrap(), simulate_experiment(&cfg).unwrap());
        let other = ExperimentConfig { seed: 8, ..cfg.clone() };
        assert_ne!(simulate_experiment(&cfg).unwrap(), simulate_experiment(&other).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| simulate_experiment(&cfg).unwrap());
        assert_eq!(single, simulate_experiment(&cfg).unwrap());
    }

    #[test]
    fn zero_heralding_gives_only_inconclusive() {
        let cfg = werner_config(0.95, 0.0);
        for t in simulate_experiment(&cfg).unwrap() {
            assert_eq!(t.conclusive_count(), 0);
            assert!(t.total_count() > 0);
        }
    }

    #[test]
    fn batches_preserve_expected_total() {
        let cfg = ExperimentConfig { batches: 4, events_per_setting: 100_000, ..werner_config(0.95, 0.6) };
        for t in simulate_experiment(&cfg).unwrap() {
            assert!((t.total_count() as f64 - 1e5).abs() < 5.0 * 1e5f64.sqrt());
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = werner_config(0.9, 0.6);
        cfg.events_per_setting = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = werner_config(0.9, 0.6);
        cfg.alice = AliceDevice::honest(0.6, vec![BlochVector::X]).unwrap();
        assert!(cfg.validate().is_err());
    }
}
