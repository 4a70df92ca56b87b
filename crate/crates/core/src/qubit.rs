//! Bloch-sphere geometry and two-qubit states in correlation-matrix form.
//!
//! A two-qubit state is carried as Alice's and Bob's local Bloch vectors plus
//! the 3x3 correlation matrix `T[i][j] = <sigma_i (x) sigma_j>`, rows indexed by
//! Alice's Pauli axis and columns by Bob's.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::Sign;

/// Tolerance on Bloch-vector norms and correlation singular values.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    /// Raw constructor, no validation.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    /// A state vector: must lie in the closed Bloch ball.
    pub fn state(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector::new(x, y, z);
        if !v.is_finite() || v.norm() > 1.0 + NORM_TOL {
            return Err(Error::invalid(format!("Bloch vector {v:?} lies outside the unit ball")));
        }
        Ok(v)
    }

    /// A measurement direction, renormalized to unit length.
    pub fn direction(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector::new(x, y, z);
        let n = v.norm();
        if !v.is_finite() || n == 0.0 {
            return Err(Error::invalid(format!("cannot normalize {v:?} to a direction")));
        }
        Ok(v * (1.0 / n))
    }

    /// Unit vector at polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        BlochVector::new(st * cp, st * sp, ct)
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    /// Same direction, unit length. Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        BlochVector::new(a[0], a[1], a[2])
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, k: f64) -> BlochVector {
        BlochVector::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Two-qubit state in Bloch/correlation form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTwoQubitState")]
pub struct TwoQubitState {
    alice_local: BlochVector,
    bob_local: BlochVector,
    correlations: [[f64; 3]; 3],
}

#[derive(Deserialize)]
struct RawTwoQubitState {
    alice_local: BlochVector,
    bob_local: BlochVector,
    correlations: [[f64; 3]; 3],
}

impl TryFrom<RawTwoQubitState> for TwoQubitState {
    type Error = Error;
    fn try_from(raw: RawTwoQubitState) -> Result<Self> {
        TwoQubitState::new(raw.alice_local, raw.bob_local, raw.correlations)
    }
}

impl TwoQubitState {
    pub fn new(alice_local: BlochVector, bob_local: BlochVector, correlations: [[f64; 3]; 3]) -> Result<Self> {
        for v in [alice_local, bob_local] {
            BlochVector::state(v.x, v.y, v.z)?;
        }
        if correlations.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("correlation matrix has non-finite entries"));
        }
        let sv = Matrix3::from_fn(|i, j| correlations[i][j]).singular_values();
        if let Some(s) = sv.iter().find(|s| **s > 1.0 + NORM_TOL) {
            return Err(Error::invalid(format!("correlation singular value {s} exceeds 1")));
        }
        Ok(TwoQubitState { alice_local, bob_local, correlations })
    }

    /// `V |psi-><psi-| + (1 - V) I/4`.
    pub fn werner(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::invalid(format!("visibility must lie in [0, 1], got {visibility}")));
        }
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = -visibility;
        }
        Ok(TwoQubitState { alice_local: BlochVector::ZERO, bob_local: BlochVector::ZERO, correlations: t })
    }

    pub fn alice_local(&self) -> BlochVector {
        self.alice_local
    }

    pub fn bob_local(&self) -> BlochVector {
        self.bob_local
    }

    pub fn correlations(&self) -> &[[f64; 3]; 3] {
        &self.correlations
    }

    /// `T^T a`: the correlation matrix contracted with Alice's direction.
    fn contract_alice(&self, a: &BlochVector) -> BlochVector {
        let a = a.to_array();
        let t = &self.correlations;
        BlochVector::from_array(std::array::from_fn(|j| (0..3).map(|i| t[i][j] * a[i]).sum()))
    }

    /// Probability that a projective Alice measurement along `dir` gives `outcome`.
    pub fn alice_outcome_probability(&self, dir: &BlochVector, outcome: Sign) -> f64 {
        0.5 * (1.0 + outcome.as_f64() * self.alice_local.dot(dir))
    }
}

/// Bob's conditional Bloch vector after Alice measures `alice_dir` and obtains `outcome`.
pub fn steered_bloch(state: &TwoQubitState, alice_dir: &BlochVector, outcome: Sign) -> Result<BlochVector> {
    if !alice_dir.is_unit() {
        return Err(Error::invalid("Alice's measurement direction must be a unit vector"));
    }
    let s = outcome.as_f64();
    let denominator = 1.0 + s * state.alice_local.dot(alice_dir);
    if denominator <= 0.0 {
        return Err(Error::DegenerateConditioning { denominator });
    }
    Ok((state.bob_local + state.contract_alice(alice_dir) * s) * (1.0 / denominator))
}

/// Largest `|b_i . b_j|` over distinct pairs.
pub fn max_pairwise_overlap(directions: &[BlochVector]) -> Result<f64> {
    if directions.len() < 2 {
        return Err(Error::invalid("need at least two directions to measure overlap"));
    }
    let mut worst: f64 = 0.0;
    for (i, a) in directions.iter().enumerate() {
        for b in &directions[i + 1..] {
            worst = worst.max(a.dot(b).abs());
        }
    }
    Ok(worst.min(1.0))
}

/// Bob's `N` (2 or 3) measurement directions together with their nonorthogonality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasurementSet")]
pub struct MeasurementSet {
    directions: Vec<BlochVector>,
    epsilon: f64,
}

#[derive(Deserialize)]
struct RawMeasurementSet {
    directions: Vec<BlochVector>,
}

impl TryFrom<RawMeasurementSet> for MeasurementSet {
    type Error = Error;
    fn try_from(raw: RawMeasurementSet) -> Result<Self> {
        MeasurementSet::new(raw.directions)
    }
}

impl MeasurementSet {
    /// Directions are renormalized; `epsilon` is computed from them.
    pub fn new(directions: Vec<BlochVector>) -> Result<Self> {
        if !(2..=3).contains(&directions.len()) {
            return Err(Error::invalid(format!("need 2 or 3 measurement directions, got {}", directions.len())));
        }
        let directions = directions
            .into_iter()
            .map(|d| BlochVector::direction(d.x, d.y, d.z))
            .collect::<Result<Vec<_>>>()?;
        let epsilon = max_pairwise_overlap(&directions)?;
        Ok(MeasurementSet { directions, epsilon })
    }

    pub fn directions(&self) -> &[BlochVector] {
        &self.directions
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// The first `n` directions as a new set.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::invalid(format!("cannot take {n} of {} directions", self.len())));
        }
        MeasurementSet::new(self.directions[..n].to_vec())
    }
}

/// Pauli X, Y and Z.
pub fn make_mub_triad() -> MeasurementSet {
    MeasurementSet { directions: vec![BlochVector::X, BlochVector::Y, BlochVector::Z], epsilon: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn arb_direction() -> impl Strategy<Value = BlochVector> {
        (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
            .prop_map(|(theta, phi)| BlochVector::from_spherical(theta, phi))
    }

    /// Rodrigues rotation about a unit axis.
    fn rotate(v: BlochVector, axis: BlochVector, angle: f64) -> BlochVector {
        let (s, c) = angle.sin_cos();
        v * c + axis.cross(&v) * s + axis * (axis.dot(&v) * (1.0 - c))
    }

    #[test]
    fn mub_triad_is_orthonormal() {
        let set = make_mub_triad();
        assert_eq!(set.directions(), &[BlochVector::X, BlochVector::Y, BlochVector::Z]);
        assert_eq!(set.epsilon(), 0.0);
        let d = set.directions();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_eq!(d[i].dot(&d[j]), 0.0);
            }
        }
        let two = set.truncated(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two.epsilon(), 0.0);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(max_pairwise_overlap(make_mub_triad().directions()).unwrap(), 0.0);
        let theta = 89.232_f64.to_radians();
        let pair = [BlochVector::X, BlochVector::new(theta.cos(), theta.sin(), 0.0)];
        assert_abs_diff_eq!(max_pairwise_overlap(&pair).unwrap(), 0.0134, epsilon = 5e-5);
        assert_eq!(max_pairwise_overlap(&[BlochVector::Z, BlochVector::Z]).unwrap(), 1.0);
        assert!(max_pairwise_overlap(&[BlochVector::Z]).is_err());
        assert!(max_pairwise_overlap(&[]).is_err());
    }

    #[test]
    fn werner_correlations() {
        let singlet = TwoQubitState::werner(1.0).unwrap();
        assert_eq!(singlet.correlations(), &[[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        let mixed = TwoQubitState::werner(0.0).unwrap();
        assert!(mixed.correlations().iter().flatten().all(|c| *c == 0.0));
        let lab = TwoQubitState::werner(0.9678).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -0.9678 } else { 0.0 };
                assert_eq!(lab.correlations()[i][j], expect);
            }
        }
        assert_eq!(lab.alice_local(), BlochVector::ZERO);
        assert_eq!(lab.bob_local(), BlochVector::ZERO);
        assert!(TwoQubitState::werner(1.01).is_err());
        assert!(TwoQubitState::werner(-0.1).is_err());
    }

    #[test]
    fn rejects_unphysical_correlations() {
        let t = [[1.2, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(TwoQubitState::new(BlochVector::ZERO, BlochVector::ZERO, t).is_err());
        assert!(TwoQubitState::new(BlochVector::new(0.0, 0.0, 1.1), BlochVector::ZERO, [[0.0; 3]; 3]).is_err());
    }

    #[test]
    fn steered_examples() {
        let v = 0.9678;
        let w = TwoQubitState::werner(v).unwrap();
        let s = steered_bloch(&w, &BlochVector::Z, Sign::Plus).unwrap();
        assert_eq!(s, BlochVector::new(0.0, 0.0, -v));

        let mixed = TwoQubitState::werner(0.0).unwrap();
        let d = BlochVector::direction(1.0, 2.0, -0.5).unwrap();
        assert_eq!(steered_bloch(&mixed, &d, Sign::Minus).unwrap().norm(), 0.0);

        let singlet = TwoQubitState::werner(1.0).unwrap();
        let s = steered_bloch(&singlet, &BlochVector::X, Sign::Minus).unwrap();
        assert_eq!(s, BlochVector::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn steered_degenerate_conditioning() {
        // Alice's qubit is pure |+z>, so outcome -1 along z never happens.
        let t = [[0.0; 3]; 3];
        let state = TwoQubitState::new(BlochVector::Z, BlochVector::ZERO, t).unwrap();
        assert!(matches!(
            steered_bloch(&state, &BlochVector::Z, Sign::Minus),
            Err(Error::DegenerateConditioning { .. })
        ));
        assert!(steered_bloch(&state, &BlochVector::new(0.0, 0.0, 0.5), Sign::Plus).is_err());
    }

    #[test]
    fn measurement_set_renormalizes() {
        let set = MeasurementSet::new(vec![BlochVector::new(2.0, 0.0, 0.0), BlochVector::new(0.0, 0.0, 3.0)]).unwrap();
        assert!(set.directions().iter().all(|d| d.is_unit()));
        assert!(MeasurementSet::new(vec![BlochVector::X]).is_err());
        assert!(MeasurementSet::new(vec![BlochVector::X, BlochVector::ZERO]).is_err());
    }

    #[test]
    fn measurement_set_serde_recomputes_epsilon() {
        let json = r#"{"directions":[{"x":1,"y":0,"z":0},{"x":0.1,"y":1,"z":0}],"epsilon":0.0}"#;
        let set: MeasurementSet = serde_json::from_str(json).unwrap();
        assert_abs_diff_eq!(set.epsilon(), 0.1 / 1.01_f64.sqrt(), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn werner_steered_norm_is_visibility(v in 0.0..=1.0f64, d in arb_direction()) {
            let state = TwoQubitState::werner(v).unwrap();
            let plus = steered_bloch(&state, &d, Sign::Plus).unwrap();
            let minus = steered_bloch(&state, &d, Sign::Minus).unwrap();
            prop_assert!((plus.norm() - v).abs() <= 1e-12);
            prop_assert!((plus + minus).norm() <= 1e-15);
        }

        #[test]
        fn overlap_is_permutation_and_rotation_invariant(
            dirs in prop::collection::vec(arb_direction(), 2..=3),
            axis in arb_direction(),
            angle in 0.0..std::f64::consts::TAU,
        ) {
            let base = max_pairwise_overlap(&dirs).unwrap();
            let mut rev = dirs.clone();
            rev.reverse();
            prop_assert!((max_pairwise_overlap(&rev).unwrap() - base).abs() <= 1e-15);
            let rotated: Vec<_> = dirs.iter().map(|d| rotate(*d, axis, angle)).collect();
            prop_assert!((max_pairwise_overlap(&rotated).unwrap() - base).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }
}
