//! Predictive random sets for the pivotal uniform `W` and the plausibility
//! maps they induce for each kind of assertion about a future observable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// What is being asserted about the future value `ỹ`.
///
/// * `RightSided`: `{Ỹ > ỹ}`, whose plausibility region is an upper bound.
/// * `LeftSided`: `{Ỹ ≤ ỹ}`, giving a lower bound.
/// * `Singleton`: `{Ỹ = ỹ}`, giving a two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertionKind {
    RightSided,
    LeftSided,
    Singleton,
}

impl AssertionKind {
    pub const ALL: [AssertionKind; 3] = [
        AssertionKind::RightSided,
        AssertionKind::LeftSided,
        AssertionKind::Singleton,
    ];

    /// The random set matched to this assertion.
    pub fn random_set(self) -> PredictiveRandomSet {
        match self {
            AssertionKind::RightSided => PredictiveRandomSet::LowerInterval,
            AssertionKind::LeftSided => PredictiveRandomSet::UpperInterval,
            AssertionKind::Singleton => PredictiveRandomSet::DefaultSymmetric,
        }
    }
}

impl fmt::Display for AssertionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssertionKind::RightSided => "right",
            AssertionKind::LeftSided => "left",
            AssertionKind::Singleton => "singleton",
        })
    }
}

impl FromStr for AssertionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "right" | "right_sided" | "right-sided" | "upper" => Ok(AssertionKind::RightSided),
            "left" | "left_sided" | "left-sided" | "lower" => Ok(AssertionKind::LeftSided),
            "singleton" | "two-sided" | "two_sided" | "both" => Ok(AssertionKind::Singleton),
            other => Err(Error::domain(format!("unknown assertion kind '{other}'"))),
        }
    }
}

/// Nested random subsets of `[0, 1]` driven by `W ~ Unif(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictiveRandomSet {
    /// `[0, W]`
    LowerInterval,
    /// `[W, 1]`
    UpperInterval,
    /// `{w : |w − ½| ≤ |W − ½|}`
    DefaultSymmetric,
}

impl PredictiveRandomSet {
    /// Contour `f(w) = P(S ∋ w)`.
    pub fn contour(self, w: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Probability(w));
        }
        Ok(match self {
            PredictiveRandomSet::LowerInterval => 1.0 - w,
            PredictiveRandomSet::UpperInterval => w,
            PredictiveRandomSet::DefaultSymmetric => 1.0 - (2.0 * w - 1.0).abs(),
        })
    }

    /// Whether a realized set `S(w_draw)` contains `w`.
    pub fn contains(self, w_draw: f64, w: f64) -> bool {
        match self {
            PredictiveRandomSet::LowerInterval => w <= w_draw,
            PredictiveRandomSet::UpperInterval => w >= w_draw,
            PredictiveRandomSet::DefaultSymmetric => (w - 0.5).abs() <= (w_draw - 0.5).abs(),
        }
    }
}

/// Plausibility of an assertion given `g = G_Y(ỹ)`.
pub fn plausibility_from_g(g: f64, assertion: AssertionKind) -> Result<f64> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::Probability(g));
    }
    Ok(match assertion {
        AssertionKind::RightSided => 1.0 - g,
        AssertionKind::LeftSided => g,
        AssertionKind::Singleton => 1.0 - (2.0 * g - 1.0).abs(),
    })
}
