//! Monte Carlo predictive distributions, plausibility curves and prediction
//! plausibility regions `{ỹ : pl(ỹ) > α}`.

use crate::error::{Error, Result};
use crate::prs::{plausibility_from_g, AssertionKind};
use crate::rng::UniformStream;
use serde::{Deserialize, Serialize};

/// Default number of Monte Carlo draws behind one plausibility evaluation.
pub const DEFAULT_MC_DRAWS: usize = 10_000;
/// Default number of grid points for plotted curves.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Anything that produces iid draws of the future observable from a stream.
pub trait DrawSource {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64>;

    /// Integer-valued draws use order-statistic quantiles.
    fn is_discrete(&self) -> bool {
        false
    }
}

/// Sorted Monte Carlo sample from the predictive distribution `G_Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalG {
    draws: Vec<f64>,
    discrete: bool,
    seed: u64,
    stream_id: u64,
}

impl EmpiricalG {
    /// Builds from raw draws; NaN draws are rejected.
    pub fn from_draws(mut draws: Vec<f64>, discrete: bool, seed: u64, stream_id: u64) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::domain("empirical distribution needs at least one draw"));
        }
        if let Some(i) = draws.iter().position(|d| d.is_nan()) {
            return Err(Error::Replication {
                index: i as u64,
                source: Box::new(Error::Numeric("draw is NaN".into())),
            });
        }
        draws.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalG {
            draws,
            discrete,
            seed,
            stream_id,
        })
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Mid-rank ECDF: `(#{d < y} + ½ #{d = y}) / N`.
    pub fn eval(&self, y: f64) -> f64 {
        let below = self.draws.partition_point(|&d| d < y);
        let upto = self.draws.partition_point(|&d| d <= y);
        (below as f64 + 0.5 * (upto - below) as f64) / self.draws.len() as f64
    }

    /// Sample quantile: linear interpolation between order statistics
    /// (type 7) for continuous draws, the order statistic `⌈Np⌉` for
    /// integer-valued draws.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Probability(p));
        }
        let n = self.draws.len();
        if self.discrete {
            let idx = ((n as f64 * p).ceil() as usize).clamp(1, n) - 1;
            return Ok(self.draws[idx]);
        }
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        if lo + 1 >= n {
            return Ok(self.draws[n - 1]);
        }
        let frac = h - lo as f64;
        Ok(self.draws[lo] + frac * (self.draws[lo + 1] - self.draws[lo]))
    }

    /// Plausibility curve on `grid`.
    pub fn curve(&self, assertion: AssertionKind, grid: &[f64]) -> Result<PlausibilityCurve> {
        if grid.is_empty() {
            return Err(Error::domain("plausibility grid is empty"));
        }
        let points = grid
            .iter()
            .map(|&y| Ok((y, plausibility_from_g(self.eval(y), assertion)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PlausibilityCurve {
            assertion,
            points,
            n: self.draws.len(),
        })
    }

    /// `points` equally spaced values over the draw range padded by 5% on each side.
    pub fn default_grid(&self, points: usize) -> Vec<f64> {
        let min = self.draws[0];
        let max = self.draws[self.draws.len() - 1];
        let pad = 0.05 * (max - min);
        let (a, b) = (min - pad, max + pad);
        if points <= 1 || a == b {
            return vec![a];
        }
        let step = (b - a) / (points - 1) as f64;
        (0..points).map(|i| a + step * i as f64).collect()
    }

    /// Prediction plausibility region at level `alpha`.
    pub fn region(&self, assertion: AssertionKind, alpha: f64) -> Result<PredictionRegion> {
        check_alpha(alpha, assertion, self.draws.len())?;
        let (lower, upper) = match assertion {
            AssertionKind::RightSided => (f64::NEG_INFINITY, self.quantile(1.0 - alpha)?),
            AssertionKind::LeftSided => (self.quantile(alpha)?, f64::INFINITY),
            AssertionKind::Singleton => (self.quantile(0.5 * alpha)?, self.quantile(1.0 - 0.5 * alpha)?),
        };
        Ok(PredictionRegion {
            alpha,
            kind: assertion,
            lower,
            upper,
        })
    }
}

fn check_alpha(alpha: f64, assertion: AssertionKind, n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Probability(alpha));
    }
    let tail = match assertion {
        AssertionKind::Singleton => 0.5 * alpha,
        _ => alpha,
    };
    if (n as f64) * tail < 1.0 {
        return Err(Error::domain(format!(
            "{n} Monte Carlo draws are too few to resolve alpha = {alpha}"
        )));
    }
    Ok(())
}

/// Draws `n` values from `sampler` on `stream` and sorts them.
pub fn build_empirical_g<S: DrawSource + ?Sized>(sampler: &S, n: usize, stream: &mut UniformStream) -> Result<EmpiricalG> {
    if n == 0 {
        return Err(Error::domain("number of draws must be at least 1"));
    }
    let (seed, stream_id) = (stream.seed(), stream.stream_id());
    let mut draws = Vec::with_capacity(n);
    for i in 0..n {
        let d = sampler.draw(stream).map_err(|e| Error::Replication {
            index: i as u64,
            source: Box::new(e),
        })?;
        draws.push(d);
    }
    EmpiricalG::from_draws(draws, sampler.is_discrete(), seed, stream_id)
}

/// Lower and upper endpoint samples of an interval-valued association.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedEmpiricalG {
    pub lower: EmpiricalG,
    pub upper: EmpiricalG,
}

/// Source of `(lower, upper)` endpoint draws.
pub trait PairDrawSource {
    fn draw_pair(&self, stream: &mut UniformStream) -> Result<(f64, f64)>;
}

pub fn build_paired_empirical_g<S: PairDrawSource + ?Sized>(
    sampler: &S,
    n: usize,
    stream: &mut UniformStream,
) -> Result<PairedEmpiricalG> {
    if n == 0 {
        return Err(Error::domain("number of draws must be at least 1"));
    }
    let (seed, stream_id) = (stream.seed(), stream.stream_id());
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let (l, u) = sampler.draw_pair(stream).map_err(|e| Error::Replication {
            index: i as u64,
            source: Box::new(e),
        })?;
        lower.push(l);
        upper.push(u);
    }
    Ok(PairedEmpiricalG {
        lower: EmpiricalG::from_draws(lower, true, seed, stream_id)?,
        upper: EmpiricalG::from_draws(upper, true, seed, stream_id)?,
    })
}

impl PairedEmpiricalG {
    /// Region from endpoint percentiles: the lower limit comes from the
    /// lower-endpoint draws and the upper limit from the upper-endpoint draws.
    pub fn region(&self, assertion: AssertionKind, alpha: f64) -> Result<PredictionRegion> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::domain("endpoint samples differ in size"));
        }
        check_alpha(alpha, assertion, self.lower.len())?;
        let (lower, upper) = match assertion {
            AssertionKind::RightSided => (f64::NEG_INFINITY, self.upper.quantile(1.0 - alpha)?),
            AssertionKind::LeftSided => (self.lower.quantile(alpha)?, f64::INFINITY),
            AssertionKind::Singleton => (
                self.lower.quantile(0.5 * alpha)?,
                self.upper.quantile(1.0 - 0.5 * alpha)?,
            ),
        };
        Ok(PredictionRegion {
            alpha,
            kind: assertion,
            lower,
            upper,
        })
    }
}

pub fn region_from_endpoint_pairs(pairs: &PairedEmpiricalG, assertion: AssertionKind, alpha: f64) -> Result<PredictionRegion> {
    pairs.region(assertion, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityCurve {
    pub assertion: AssertionKind,
    pub points: Vec<(f64, f64)>,
    pub n: usize,
}

/// `{ỹ : pl(ỹ) > α}` as an interval; unbounded sides are infinite and
/// serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRegion {
    pub alpha: f64,
    pub kind: AssertionKind,
    #[serde(with = "bound::lower")]
    pub lower: f64,
    #[serde(with = "bound::upper")]
    pub upper: f64,
}

impl PredictionRegion {
    pub fn contains(&self, y: f64) -> bool {
        y >= self.lower && y <= self.upper
    }

    pub fn level(&self) -> f64 {
        1.0 - self.alpha
    }
}

mod bound {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub mod lower {
        use super::*;
        pub use super::serialize;

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
        }
    }

    pub mod upper {
        use super::*;
        pub use super::serialize;

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
        }
    }
}
