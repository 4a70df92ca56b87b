//! End-to-end runs behind each `steering` subcommand. The binary only parses
//! arguments and prints what these return.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, bound_sigma, corrected_bound, werner_threshold, BoundParams, SignificanceMode};
use crate::apparatus::{DeadTimeModel, DetectorAsymmetry};
use crate::error::{Error, Result};
use crate::io::{load_count_tables, save_count_tables, save_json, AnalysisReport, RunManifest, ThresholdRow};
use crate::montecarlo::{simulate_experiment, CountTable, ExperimentConfig};
use crate::oracle::{
    lhs_max_over_sphere, lhs_steering_parameter, random_lhs_sweep, worst_case_directions, LhsModel, SphereMax,
    SweepSummary,
};
use crate::qubit::MeasurementSet;

pub const COUNTS_FILE: &str = "counts.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Analyze count tables from a CSV file. With `settings = Some(n)` only the first
/// `n` tables enter (e.g. `N = 2` from the X and Y tables of a three-setting run).
pub fn run_analyze(
    tables_path: &Path,
    params: BoundParams,
    settings: Option<usize>,
    mode: SignificanceMode,
    dead_time_model: DeadTimeModel,
) -> Result<AnalysisReport> {
    let mut tables = load_count_tables(tables_path)?;
    if let Some(n) = settings {
        if n > tables.len() {
            return Err(Error::invalid(format!("asked for {n} settings but the file has {}", tables.len())));
        }
        tables.truncate(n);
    }
    let report = analyze(&tables, params, mode)?;
    let mut manifest = RunManifest::new("analyze");
    manifest.tables_path = Some(tables_path.display().to_string());
    manifest.parameters = Some(params);
    manifest.significance_mode = mode;
    manifest.dead_time_model = dead_time_model;
    Ok(AnalysisReport { report, manifest })
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub tables: Vec<CountTable>,
    pub counts_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Simulate `config` and write `counts.csv` plus `manifest.json` into `out_dir`.
pub fn run_simulate(config: &ExperimentConfig, out_dir: &Path) -> Result<SimulationOutput> {
    let tables = simulate_experiment(config)?;
    fs::create_dir_all(out_dir)?;
    let counts_path = out_dir.join(COUNTS_FILE);
    let manifest_path = out_dir.join(MANIFEST_FILE);
    save_count_tables(&counts_path, &tables)?;
    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(config.seed);
    manifest.dead_time_model = config.dead_time_model;
    manifest.config = Some(config.clone());
    save_json(&manifest_path, &manifest)?;
    Ok(SimulationOutput { tables, counts_path, manifest_path })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub w: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub bound_sigma: f64,
}

pub fn run_bound(params: BoundParams, n: usize) -> Result<BoundSummary> {
    let asym = DetectorAsymmetry::from_ratio(params.w)?;
    Ok(BoundSummary {
        n,
        w: params.w,
        delta: asym.delta,
        epsilon: params.epsilon,
        bound: corrected_bound(params.w, params.epsilon, n)?,
        bound_sigma: bound_sigma(params.w, params.sigma_w, params.epsilon, params.sigma_eps, n)?,
    })
}

/// Evenly spaced efficiencies from `start` to `stop` inclusive, rounded to 1e-12.
pub fn eta_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start > 0.0 && stop <= 1.0 && start <= stop) {
        return Err(Error::invalid("eta grid needs 0 < start <= stop <= 1 and step > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

pub fn run_threshold(n: usize, etas: &[f64]) -> Result<Vec<ThresholdRow>> {
    etas.iter().map(|&eta| Ok(ThresholdRow { eta, threshold: werner_threshold(n, eta)? })).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub w: f64,
    pub epsilon: f64,
    /// Beam-displacer transmission.
    pub t: f64,
    pub n_models: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub params: OracleParams,
    pub corrected_bound: f64,
    /// `sum_i (b_i . u*)^2` for the worst-case direction set.
    pub worst_case_achieved: f64,
    /// `1 + (N - 1) epsilon`.
    pub worst_case_expected: f64,
    pub sphere_max: SphereMax,
    pub axis_model_value: f64,
    pub sweep: SweepSummary,
    /// No sampled model and no grid point exceeds the corrected bound.
    pub sound: bool,
}

/// Check the corrected bound on the worst-case direction set for `epsilon`:
/// sphere search, the axis-aligned LHS model, and a random LHS sweep.
pub fn run_oracle(params: OracleParams) -> Result<OracleSummary> {
    let asym = DetectorAsymmetry::from_ratio(params.w)?;
    let worst = worst_case_directions(params.n, params.epsilon)?;
    let set = MeasurementSet::new(worst.directions.clone())?;
    let bound = corrected_bound(params.w, params.epsilon, params.n)?;
    let sphere_max = lhs_max_over_sphere(&set, asym);
    let axis_model_value = lhs_steering_parameter(&LhsModel::axis_model(worst.u_star, params.n), &set, asym, params.t)?;
    let sweep = random_lhs_sweep(&set, asym, params.t, params.n_models, params.seed)?;
    let sound = !sweep.exceeded && sphere_max.value <= bound + 1e-9 && axis_model_value <= bound + 1e-9;
    Ok(OracleSummary {
        params,
        corrected_bound: bound,
        worst_case_achieved: worst.achieved,
        worst_case_expected: 1.0 + (params.n as f64 - 1.0) * params.epsilon,
        sphere_max,
        axis_model_value,
        sweep,
        sound,
    })
}
