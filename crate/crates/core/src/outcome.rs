//! Outcome labels. Numeric encoding is `+1`, `-1` and `0` (inconclusive).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A conclusive binary outcome: Bob's result, or the sign Alice conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Column index in a [`CountTable`](crate::montecarlo::CountTable).
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::invalid(format!("binary outcome must be +1 or -1, got {other}"))),
        }
    }
}

/// Alice's reported outcome. `Inconclusive` covers both no-click and double-click trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliceOutcome {
    Plus,
    Minus,
    Inconclusive,
}

impl AliceOutcome {
    pub const ALL: [AliceOutcome; 3] = [AliceOutcome::Plus, AliceOutcome::Minus, AliceOutcome::Inconclusive];

    pub fn value(self) -> i8 {
        match self {
            AliceOutcome::Plus => 1,
            AliceOutcome::Minus => -1,
            AliceOutcome::Inconclusive => 0,
        }
    }

    /// Row index in a count table.
    pub fn index(self) -> usize {
        match self {
            AliceOutcome::Plus => 0,
            AliceOutcome::Minus => 1,
            AliceOutcome::Inconclusive => 2,
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != AliceOutcome::Inconclusive
    }
}

impl From<Sign> for AliceOutcome {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => AliceOutcome::Plus,
            Sign::Minus => AliceOutcome::Minus,
        }
    }
}

impl TryFrom<i8> for AliceOutcome {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(AliceOutcome::Plus),
            -1 => Ok(AliceOutcome::Minus),
            0 => Ok(AliceOutcome::Inconclusive),
            other => Err(Error::invalid(format!("Alice outcome must be +1, -1 or 0, got {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips() {
        for a in AliceOutcome::ALL {
            assert_eq!(AliceOutcome::try_from(a.value()).unwrap(), a);
        }
        for s in Sign::ALL {
            assert_eq!(Sign::try_from(s.value()).unwrap(), s);
            assert_eq!(s.flip().flip(), s);
        }
        assert!(Sign::try_from(0).is_err());
        assert!(AliceOutcome::try_from(2).is_err());
    }
}
