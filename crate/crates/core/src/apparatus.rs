//! Measurement-device models: Bob's trusted polarization analyzer and Alice's black box.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::LhsModel;
use crate::qubit::BlochVector;

/// Bob's analyzer: a beam displacer with transmission `t` per polarization,
/// followed by a "+1" and a "-1" detector with overall efficiencies `eta_plus`, `eta_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BobApparatus {
    transmission: f64,
    eta_plus: f64,
    eta_minus: f64,
    double_click_prob: f64,
}

#[derive(Deserialize)]
struct RawBobApparatus {
    transmission: f64,
    eta_plus: f64,
    eta_minus: f64,
    #[serde(default)]
    double_click_prob: f64,
}

impl<'de> Deserialize<'de> for BobApparatus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawBobApparatus::deserialize(d)?;
        BobApparatus::new(raw.transmission, raw.eta_plus, raw.eta_minus, raw.double_click_prob)
            .map_err(serde::de::Error::custom)
    }
}

impl BobApparatus {
    pub fn new(transmission: f64, eta_plus: f64, eta_minus: f64, double_click_prob: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&transmission) {
            return Err(Error::invalid(format!("transmission must lie in [0.5, 1], got {transmission}")));
        }
        for (name, eta) in [("eta_plus", eta_plus), ("eta_minus", eta_minus)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1], got {eta}")));
            }
        }
        if !(0.0..1.0).contains(&double_click_prob) {
            return Err(Error::invalid(format!("double-click probability must lie in [0, 1), got {double_click_prob}")));
        }
        Ok(BobApparatus { transmission, eta_plus, eta_minus, double_click_prob })
    }

    /// Perfect projective measurement with unit efficiency.
    pub fn ideal() -> Self {
        BobApparatus { transmission: 1.0, eta_plus: 1.0, eta_minus: 1.0, double_click_prob: 0.0 }
    }

    /// Efficiencies realizing a given asymmetry, with the "+1" detector the stronger one.
    ///
    /// Only the ratio matters for any quantity conditioned on Bob's detection.
    pub fn from_asymmetry(asym: DetectorAsymmetry, transmission: f64) -> Result<Self> {
        BobApparatus::new(transmission, 1.0, 1.0 / asym.w, 0.0)
    }

    /// Same device with the two detectors swapped.
    pub fn mirrored(&self) -> Self {
        BobApparatus { eta_plus: self.eta_minus, eta_minus: self.eta_plus, ..*self }
    }

    /// Operating point of the lab analyzer: `1 - t = 1e-5`, efficiency ratio 1.0115,
    /// about one double click per 10^4 detections.
    pub fn lab_replica() -> Self {
        let eta_plus = 0.40;
        BobApparatus { transmission: 1.0 - 1e-5, eta_plus, eta_minus: eta_plus / 1.0115, double_click_prob: 1e-4 }
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn eta_plus(&self) -> f64 {
        self.eta_plus
    }

    pub fn eta_minus(&self) -> f64 {
        self.eta_minus
    }

    pub fn double_click_prob(&self) -> f64 {
        self.double_click_prob
    }

    pub fn asymmetry(&self) -> DetectorAsymmetry {
        // Both efficiencies were validated positive on construction.
        detector_asymmetry(self.eta_plus, self.eta_minus).expect("validated efficiencies")
    }
}

/// Click probabilities of Bob's two detectors for one incoming photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbs {
    pub plus: f64,
    pub minus: f64,
}

impl ClickProbs {
    /// Probability that Bob gets a conclusive result.
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }

    /// `<B>` conditioned on detection.
    pub fn expectation(&self) -> f64 {
        (self.plus - self.minus) / self.total()
    }
}

/// `P(+/-|b) = (eta_+/- / 2) [1 +/- (2t - 1) b.u]` for a photon with Bloch vector `u`.
pub fn bob_click_probs(app: &BobApparatus, direction: &BlochVector, u: &BlochVector) -> ClickProbs {
    let contrast = (2.0 * app.transmission - 1.0) * direction.dot(u);
    ClickProbs { plus: 0.5 * app.eta_plus * (1.0 + contrast), minus: 0.5 * app.eta_minus * (1.0 - contrast) }
}

/// Efficiency ratio `w >= 1` and the derived `delta = (w - 1) / (2w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorAsymmetry {
    pub w: f64,
    pub delta: f64,
}

impl DetectorAsymmetry {
    pub fn ideal() -> Self {
        DetectorAsymmetry { w: 1.0, delta: 0.0 }
    }

    pub fn from_ratio(w: f64) -> Result<Self> {
        if !(w.is_finite() && w >= 1.0) {
            return Err(Error::invalid(format!("efficiency ratio must be >= 1, got {w}")));
        }
        Ok(DetectorAsymmetry { w, delta: (w - 1.0) / (2.0 * w) })
    }
}

pub fn detector_asymmetry(eta_plus: f64, eta_minus: f64) -> Result<DetectorAsymmetry> {
    for eta in [eta_plus, eta_minus] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("detector efficiency must lie in (0, 1], got {eta}")));
        }
    }
    let hi = eta_plus.max(eta_minus);
    let lo = eta_plus.min(eta_minus);
    Ok(DetectorAsymmetry { w: hi / lo, delta: (hi - lo) / (2.0 * hi) })
}

/// How dead-time loss is computed from a singles rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadTimeModel {
    /// `1 - exp(-rate * tau)`: Poisson arrivals, exact at any rate.
    #[default]
    Exponential,
    /// `rate * tau`, capped at 1. First-order approximation.
    Linear,
}

impl FromStr for DeadTimeModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(DeadTimeModel::Exponential),
            "linear" => Ok(DeadTimeModel::Linear),
            other => Err(Error::invalid(format!("unknown dead-time model '{other}'"))),
        }
    }
}

impl fmt::Display for DeadTimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeadTimeModel::Exponential => "exponential",
            DeadTimeModel::Linear => "linear",
        })
    }
}

/// Fraction of events lost to a non-paralyzable dead time at the given singles rate.
pub fn dead_time_loss(singles_rate: f64, dead_time: f64) -> f64 {
    dead_time_loss_with(DeadTimeModel::Exponential, singles_rate, dead_time)
}

pub fn dead_time_loss_with(model: DeadTimeModel, singles_rate: f64, dead_time: f64) -> f64 {
    let x = singles_rate.max(0.0) * dead_time.max(0.0);
    match model {
        DeadTimeModel::Exponential => -(-x).exp_m1(),
        DeadTimeModel::Linear => x.min(1.0),
    }
}

/// Detector rate and dead time on Alice's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadTime {
    pub singles_rate_hz: f64,
    pub dead_time_s: f64,
}

/// Alice's untrusted device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AliceDevice {
    /// Projective measurements on her half of the shared state; conclusive with
    /// probability `heralding` whenever Bob detects.
    Honest { heralding: f64, directions: Vec<BlochVector> },
    /// A local-hidden-state strategy.
    Adversarial(LhsModel),
}

impl AliceDevice {
    pub fn honest(heralding: f64, directions: Vec<BlochVector>) -> Result<Self> {
        if !(0.0..=1.0).contains(&heralding) {
            return Err(Error::invalid(format!("heralding efficiency must lie in [0, 1], got {heralding}")));
        }
        let directions = directions
            .into_iter()
            .map(|d| BlochVector::direction(d.x, d.y, d.z))
            .collect::<Result<Vec<_>>>()?;
        Ok(AliceDevice::Honest { heralding, directions })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AliceDevice::Honest { heralding, directions } => {
                AliceDevice::honest(*heralding, directions.clone()).map(|_| ())
            }
            AliceDevice::Adversarial(model) => model.validate(),
        }
    }
}
