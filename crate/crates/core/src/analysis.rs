//! Estimators: conditional expectations, the steering parameter `S_N`, the
//! imperfection-corrected bound, Poissonian error propagation and significance.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{stream_rng, CellView};
use crate::outcome::{AliceOutcome, Sign};

type Cells = [[f64; 2]; 3];

fn check_settings(n: usize) -> Result<()> {
    if (2..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("need N = 2 or 3 settings, got {n}")))
    }
}

/// `<B>` conditioned on Alice reporting `a`.
pub fn conditional_expectation<T: CellView + ?Sized>(table: &T, a: AliceOutcome) -> Result<f64> {
    let plus = table.cell(a, Sign::Plus);
    let minus = table.cell(a, Sign::Minus);
    let support = plus + minus;
    if support <= 0.0 {
        return Err(Error::UndefinedConditional { outcome: a.value() });
    }
    Ok((plus - minus) / support)
}

fn term_from_cells(cells: &Cells) -> Option<f64> {
    let total: f64 = cells.iter().flatten().sum();
    if total <= 0.0 {
        return None;
    }
    // P(a) <B>_a^2 = (n_a+ - n_a-)^2 / ((n_a+ + n_a-) n); empty rows carry zero weight.
    Some(
        cells
            .iter()
            .filter(|[p, m]| p + m > 0.0)
            .map(|[p, m]| (p - m).powi(2) / ((p + m) * total))
            .sum(),
    )
}

/// `sum_a P(A = a) <B>_{A=a}^2` over `a = +1, -1, 0` for one setting.
pub fn setting_term<T: CellView + ?Sized>(table: &T) -> Result<f64> {
    term_from_cells(&table.cells()).ok_or(Error::EmptyTable { setting: table.setting() })
}

/// `S_N`: the sum of [`setting_term`] over the `N` settings.
pub fn steering_parameter<T: CellView>(tables: &[T]) -> Result<f64> {
    check_settings(tables.len())?;
    tables.iter().map(setting_term).sum()
}

/// Mean fraction of events where Alice was conclusive.
pub fn heralding_estimate<T: CellView>(tables: &[T]) -> Result<f64> {
    let cells: Vec<Cells> = tables.iter().map(CellView::cells).collect();
    heralding_from_cells(&cells).map_err(|i| Error::EmptyTable { setting: tables[i].setting() })
}

/// Mean `|sum_{a != 0} a b n(a, b)| / sum_{a != 0} n(a, b)`.
pub fn visibility_estimate<T: CellView>(tables: &[T]) -> Result<f64> {
    let cells: Vec<Cells> = tables.iter().map(CellView::cells).collect();
    visibility_from_cells(&cells)
}

pub fn heralding_and_visibility<T: CellView>(tables: &[T]) -> Result<(f64, f64)> {
    Ok((heralding_estimate(tables)?, visibility_estimate(tables)?))
}

fn heralding_from_cells(cells: &[Cells]) -> std::result::Result<f64, usize> {
    if cells.is_empty() {
        return Err(0);
    }
    let mut acc = 0.0;
    for (i, c) in cells.iter().enumerate() {
        let total: f64 = c.iter().flatten().sum();
        if total <= 0.0 {
            return Err(i);
        }
        acc += c[..2].iter().flatten().sum::<f64>() / total;
    }
    Ok(acc / cells.len() as f64)
}

fn visibility_from_cells(cells: &[Cells]) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::NoConclusiveEvents);
    }
    let mut acc = 0.0;
    for c in cells {
        let conclusive: f64 = c[..2].iter().flatten().sum();
        if conclusive <= 0.0 {
            return Err(Error::NoConclusiveEvents);
        }
        // Rows are a = +1, -1; columns b = +1, -1.
        let correlation = c[0][0] - c[0][1] - c[1][0] + c[1][1];
        acc += correlation.abs() / conclusive;
    }
    Ok(acc / cells.len() as f64)
}

/// Quantities that can be estimated from a set of count tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    SteeringParameter,
    Heralding,
    Visibility,
}

impl Estimator {
    fn evaluate(self, cells: &[Cells]) -> Result<f64> {
        match self {
            Estimator::SteeringParameter => {
                check_settings(cells.len())?;
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| term_from_cells(c).ok_or(Error::EmptyTable { setting: i }))
                    .sum()
            }
            Estimator::Heralding => heralding_from_cells(cells).map_err(|i| Error::EmptyTable { setting: i }),
            Estimator::Visibility => visibility_from_cells(cells),
        }
    }

    pub fn estimate<T: CellView>(self, tables: &[T]) -> Result<f64> {
        let cells: Vec<Cells> = tables.iter().map(CellView::cells).collect();
        self.evaluate(&cells)
    }
}

/// Delta-method standard deviation under independent Poisson cells:
/// `sqrt(sum (df/dn)^2 n)`, with each partial a central difference of one count.
pub fn propagate_poisson_sigma<T: CellView>(tables: &[T], estimator: Estimator) -> Result<f64> {
    if tables.is_empty() {
        return Err(Error::invalid("no tables to propagate"));
    }
    let base: Vec<Cells> = tables.iter().map(CellView::cells).collect();
    estimator.evaluate(&base)?;
    let mut variance = 0.0;
    let mut work = base.clone();
    for t in 0..base.len() {
        for a in 0..3 {
            for b in 0..2 {
                let n = base[t][a][b];
                if n <= 0.0 {
                    continue;
                }
                work[t][a][b] = n + 1.0;
                let up = estimator.evaluate(&work)?;
                work[t][a][b] = n - 1.0;
                let down = estimator.evaluate(&work)?;
                work[t][a][b] = n;
                let partial = 0.5 * (up - down);
                variance += partial * partial * n;
            }
        }
    }
    Ok(variance.sqrt())
}

/// Default replicate count for [`bootstrap_sigma`].
pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 1000;

/// Parametric-bootstrap standard deviation: every cell is redrawn as `Poisson(n)`,
/// the estimator recomputed, and the sample standard deviation taken over replicates.
/// Replicate `k` uses its own RNG stream.
pub fn bootstrap_sigma<T: CellView>(tables: &[T], estimator: Estimator, replicates: usize, seed: u64) -> Result<f64> {
    if replicates < 2 {
        return Err(Error::invalid("bootstrap needs at least two replicates"));
    }
    if tables.is_empty() {
        return Err(Error::invalid("no tables to resample"));
    }
    let base: Vec<Cells> = tables.iter().map(CellView::cells).collect();
    let values = (0..replicates)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let resampled: Vec<Cells> = base
                .iter()
                .map(|c| {
                    c.map(|row| {
                        row.map(|n| if n > 0.0 { Poisson::new(n).expect("positive mean").sample(&mut rng) } else { 0.0 })
                    })
                })
                .collect();
            estimator.evaluate(&resampled)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / replicates as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
    Ok(var.sqrt())
}

fn bound_formula(w: f64, epsilon: f64, n: usize) -> f64 {
    let delta = (w - 1.0) / (2.0 * w);
    w * w * (1.0 + (n as f64 - 1.0) * (delta + epsilon - delta * epsilon))
}

/// Local-hidden-state bound on `S_N` for an analyzer with efficiency ratio `w` and
/// direction nonorthogonality `epsilon`: `w^2 [1 + (N-1)(delta + eps - delta eps)]`
/// with `delta = (w - 1) / (2w)`.
pub fn corrected_bound(w: f64, epsilon: f64, n: usize) -> Result<f64> {
    check_settings(n)?;
    if !(w.is_finite() && w >= 1.0) {
        return Err(Error::invalid(format!("w must be >= 1, got {w}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok(bound_formula(w, epsilon, n))
}

/// First-order uncertainty of [`corrected_bound`]: the two partials (central
/// differences) combined in quadrature.
pub fn bound_sigma(w: f64, sigma_w: f64, epsilon: f64, sigma_eps: f64, n: usize) -> Result<f64> {
    corrected_bound(w, epsilon, n)?;
    if !(sigma_w >= 0.0 && sigma_eps >= 0.0) {
        return Err(Error::invalid("uncertainties must be nonnegative"));
    }
    // The formula is a polynomial in (w, 1/w, eps), so stepping just outside the
    // domain at w = 1 or eps = 0 is harmless.
    const H: f64 = 1e-6;
    let d_w = (bound_formula(w + H, epsilon, n) - bound_formula(w - H, epsilon, n)) / (2.0 * H);
    let d_eps = (bound_formula(w, epsilon + H, n) - bound_formula(w, epsilon - H, n)) / (2.0 * H);
    Ok((d_w * sigma_w).hypot(d_eps * sigma_eps))
}

/// Which uncertainties enter the significance denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignificanceMode {
    #[default]
    Quadrature,
    SOnly,
    BoundOnly,
}

impl FromStr for SignificanceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(SignificanceMode::Quadrature),
            "s-only" => Ok(SignificanceMode::SOnly),
            "bound-only" => Ok(SignificanceMode::BoundOnly),
            other => Err(Error::invalid(format!("unknown significance mode '{other}'"))),
        }
    }
}

impl fmt::Display for SignificanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignificanceMode::Quadrature => "quadrature",
            SignificanceMode::SOnly => "s-only",
            SignificanceMode::BoundOnly => "bound-only",
        })
    }
}

impl SignificanceMode {
    pub fn denominator(self, s_sigma: f64, bound_sigma: f64) -> f64 {
        match self {
            SignificanceMode::Quadrature => s_sigma.hypot(bound_sigma),
            SignificanceMode::SOnly => s_sigma,
            SignificanceMode::BoundOnly => bound_sigma,
        }
    }
}

/// `(S - bound) / sqrt(sigma_S^2 + sigma_bound^2)`, in standard deviations.
pub fn violation_significance(s_value: f64, s_sigma: f64, bound: f64, bound_sigma: f64) -> Result<f64> {
    violation_significance_with(SignificanceMode::Quadrature, s_value, s_sigma, bound, bound_sigma)
}

pub fn violation_significance_with(
    mode: SignificanceMode,
    s_value: f64,
    s_sigma: f64,
    bound: f64,
    bound_sigma: f64,
) -> Result<f64> {
    if !(s_sigma >= 0.0 && bound_sigma >= 0.0) {
        return Err(Error::invalid("uncertainties must be nonnegative"));
    }
    let denominator = mode.denominator(s_sigma, bound_sigma);
    if denominator <= 0.0 {
        return Err(Error::invalid(format!("significance undefined: zero uncertainty under {mode} convention")));
    }
    Ok((s_value - bound) / denominator)
}

/// Minimal Werner visibility for a violation at `N` settings and heralding `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "v_min", rename_all = "lowercase")]
pub enum WernerThreshold {
    Reachable(f64),
    /// `eta N < 1`: even a pure singlet cannot violate.
    Unreachable,
}

impl WernerThreshold {
    pub fn visibility(self) -> Option<f64> {
        match self {
            WernerThreshold::Reachable(v) => Some(v),
            WernerThreshold::Unreachable => None,
        }
    }
}

/// Boundary of `eta V^2 > 1/N`, i.e. `V = sqrt(1 / (N eta))`.
pub fn werner_threshold(n: usize, eta: f64) -> Result<WernerThreshold> {
    check_settings(n)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("heralding efficiency must lie in (0, 1], got {eta}")));
    }
    let v = (1.0 / (n as f64 * eta)).sqrt();
    Ok(if v > 1.0 { WernerThreshold::Unreachable } else { WernerThreshold::Reachable(v) })
}

/// Inputs to the corrected bound, with their one-sigma uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub w: f64,
    pub sigma_w: f64,
    pub epsilon: f64,
    pub sigma_eps: f64,
}

impl BoundParams {
    pub fn ideal() -> Self {
        BoundParams { w: 1.0, sigma_w: 0.0, epsilon: 0.0, sigma_eps: 0.0 }
    }
}

/// Everything an analysis run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s_value: f64,
    #[serde(rename = "S_sigma")]
    pub s_sigma: f64,
    pub bound: f64,
    pub bound_sigma: f64,
    /// `None` when the selected convention's uncertainty is exactly zero.
    pub significance: Option<f64>,
    pub significance_mode: SignificanceMode,
    pub eta_hat: f64,
    pub visibility_hat: f64,
}

impl SteeringReport {
    /// Recompute the significance from this report's own fields.
    pub fn recomputed_significance(&self) -> Option<f64> {
        violation_significance_with(self.significance_mode, self.s_value, self.s_sigma, self.bound, self.bound_sigma)
            .ok()
    }
}

/// Full estimator chain over `N` count tables.
pub fn analyze<T: CellView>(tables: &[T], params: BoundParams, mode: SignificanceMode) -> Result<SteeringReport> {
    let n = tables.len();
    let s_value = steering_parameter(tables)?;
    let s_sigma = propagate_poisson_sigma(tables, Estimator::SteeringParameter)?;
    let bound = corrected_bound(params.w, params.epsilon, n)?;
    let bound_sigma = bound_sigma(params.w, params.sigma_w, params.epsilon, params.sigma_eps, n)?;
    let (eta_hat, visibility_hat) = heralding_and_visibility(tables)?;
    let significance = violation_significance_with(mode, s_value, s_sigma, bound, bound_sigma).ok();
    Ok(SteeringReport {
        n,
        s_value,
        s_sigma,
        bound,
        bound_sigma,
        significance,
        significance_mode: mode,
        eta_hat,
        visibility_hat,
    })
}
