//! Marginal associations for future observables.
//!
//! Each model solves its baseline association for the parameter in terms of
//! the data and fresh auxiliary draws, then pushes that solution through the
//! association for the future quantity. A [`MarginalSampler`] draws one
//! realization of that right-hand side per call, so the sorted draws form a
//! Monte Carlo picture of the predictive distribution `G_Y`.

use crate::dist::{binomial_quantile, DistSpec};
use crate::error::{Error, Result};
use crate::gamma_solver::{self, GammaSolveConfig};
use crate::plaus::{DrawSource, PairDrawSource, PredictionRegion};
use crate::prs::AssertionKind;
use crate::rng::UniformStream;
use crate::special::{beta_inc, beta_quantile, gamma_quantile};
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Normal,
    LogNormal,
    Gamma,
    Binomial,
    PoissonProcess,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Normal => "normal",
            ModelKind::LogNormal => "lognormal",
            ModelKind::Gamma => "gamma",
            ModelKind::Binomial => "binomial",
            ModelKind::PoissonProcess => "poisson_process",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "normal" => Ok(ModelKind::Normal),
            "lognormal" | "log_normal" => Ok(ModelKind::LogNormal),
            "gamma" => Ok(ModelKind::Gamma),
            "binomial" => Ok(ModelKind::Binomial),
            "poisson_process" | "poisson" => Ok(ModelKind::PoissonProcess),
            other => Err(Error::domain(format!("unknown model '{other}'"))),
        }
    }
}

/// Observed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleData {
    Values(Vec<f64>),
    Count { y: u64, n: u64 },
    /// Time `t_n` of the n-th arrival of a Poisson process.
    Arrival { t_n: f64, n: u64 },
}

impl SampleData {
    pub fn values(&self) -> Result<&[f64]> {
        match self {
            SampleData::Values(v) => Ok(v),
            _ => Err(Error::Data("this model needs a sample of real values".into())),
        }
    }
}

/// What future quantity is predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "target")]
pub enum PredictionTarget {
    NextObservation,
    KthLargestOfM { m: u32, k: u32 },
    MeanOfM { m: u32 },
    MaxOfM { m: u32 },
    ArrivalNPlusK { k: u32 },
    BinomialCountOfM { m: u64 },
}

impl PredictionTarget {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PredictionTarget::NextObservation => true,
            PredictionTarget::KthLargestOfM { m, k } => m >= 1 && k >= 1 && k <= m,
            PredictionTarget::MeanOfM { m } | PredictionTarget::MaxOfM { m } => m >= 1,
            PredictionTarget::ArrivalNPlusK { k } => k >= 1,
            PredictionTarget::BinomialCountOfM { m } => m >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid prediction target {self}")))
        }
    }
}

impl fmt::Display for PredictionTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PredictionTarget::NextObservation => write!(f, "next"),
            PredictionTarget::KthLargestOfM { m, k } => write!(f, "kth-of-m:{m}:{k}"),
            PredictionTarget::MeanOfM { m } => write!(f, "mean-of-m:{m}"),
            PredictionTarget::MaxOfM { m } => write!(f, "max-of-m:{m}"),
            PredictionTarget::ArrivalNPlusK { k } => write!(f, "arrival:{k}"),
            PredictionTarget::BinomialCountOfM { m } => write!(f, "count-of-m:{m}"),
        }
    }
}

impl FromStr for PredictionTarget {
    type Err = Error;

    /// `next`, `kth-of-m:M:K`, `mean-of-m:M`, `max-of-m:M`, `arrival:K`, `count-of-m:M`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<u64> {
            parts
                .get(i)
                .ok_or_else(|| Error::domain(format!("target '{s}' is missing a number")))?
                .parse::<u64>()
                .map_err(|_| Error::domain(format!("target '{s}' has a non-integer field")))
        };
        let small = |v: u64| u32::try_from(v).map_err(|_| Error::domain(format!("target '{s}' is too large")));
        let expect_len = |len: usize| {
            if parts.len() == len {
                Ok(())
            } else {
                Err(Error::domain(format!("malformed target '{s}'")))
            }
        };
        let t = match parts[0].to_ascii_lowercase().as_str() {
            "next" | "next-observation" => {
                expect_len(1)?;
                PredictionTarget::NextObservation
            }
            "kth-of-m" | "kth-largest-of-m" => {
                expect_len(3)?;
                PredictionTarget::KthLargestOfM {
                    m: small(num(1)?)?,
                    k: small(num(2)?)?,
                }
            }
            "mean-of-m" => {
                expect_len(2)?;
                PredictionTarget::MeanOfM { m: small(num(1)?)? }
            }
            "max-of-m" => {
                expect_len(2)?;
                PredictionTarget::MaxOfM { m: small(num(1)?)? }
            }
            "arrival" | "arrival-n-plus-k" => {
                expect_len(2)?;
                PredictionTarget::ArrivalNPlusK { k: small(num(1)?)? }
            }
            "count-of-m" | "binomial-count-of-m" => {
                expect_len(2)?;
                PredictionTarget::BinomialCountOfM { m: num(1)? }
            }
            other => return Err(Error::domain(format!("unknown target '{other}'"))),
        };
        t.validate()?;
        Ok(t)
    }
}

/// Sufficient statistics of a continuous sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SufficientStats {
    /// Sample size, mean and standard deviation (log scale for log-normal data).
    Location { n: usize, mean: f64, sd: f64 },
    /// `T1 = Σ y`, `T2 = mean(ln y) − ln(T1/n) < 0`.
    Gamma { n: usize, t1: f64, t2: f64 },
}

impl SufficientStats {
    pub fn location(n: usize, mean: f64, sd: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Data("at least two observations are required".into()));
        }
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::Data(format!("degenerate sample (mean {mean}, sd {sd})")));
        }
        Ok(SufficientStats::Location { n, mean, sd })
    }

    pub fn normal(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("sample contains non-finite values".into()));
        }
        let n = values.len();
        if n < 2 {
            return Err(Error::Data("at least two observations are required".into()));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        SufficientStats::location(n, mean, (ss / (n - 1) as f64).sqrt())
    }

    /// Normal statistics of `ln y`.
    pub fn lognormal(values: &[f64]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Data(format!("log-normal data must be strictly positive, found {v}")));
        }
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        SufficientStats::normal(&logs)
    }

    pub fn gamma(values: &[f64]) -> Result<Self> {
        let (t1, t2) = gamma_solver::gamma_sufficient_stats(values)?;
        Ok(SufficientStats::Gamma {
            n: values.len(),
            t1,
            t2,
        })
    }

    fn location_parts(&self) -> Result<(usize, f64, f64)> {
        match *self {
            SufficientStats::Location { n, mean, sd } => Ok((n, mean, sd)),
            _ => Err(Error::domain("expected location/scale statistics")),
        }
    }

    fn gamma_parts(&self) -> Result<(usize, f64, f64)> {
        match *self {
            SufficientStats::Gamma { n, t1, t2 } => Ok((n, t1, t2)),
            _ => Err(Error::domain("expected gamma statistics")),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Probability(alpha))
    }
}

/// Closed-form two-sided interval `mean ± t*_{n−1,1−α/2} · sd · √(1 + 1/n)`.
pub fn normal_next_interval(stats: &SufficientStats, alpha: f64) -> Result<PredictionRegion> {
    let (n, mean, sd) = stats.location_parts()?;
    check_alpha(alpha)?;
    let t = DistSpec::StudentT { df: (n - 1) as f64 }.quantile(1.0 - 0.5 * alpha)?;
    let half = t * sd * (1.0 + 1.0 / n as f64).sqrt();
    Ok(PredictionRegion {
        alpha,
        kind: AssertionKind::Singleton,
        lower: mean - half,
        upper: mean + half,
    })
}

/// Draws from `(U1, U2)` of the normal conditional association:
/// `U1 ~ N(0,1)` and `(n−1)U2² ~ χ²(n−1)`.
#[derive(Debug, Clone)]
struct LocationScalePivot {
    n: usize,
    chi2: ChiSquared<f64>,
}

impl LocationScalePivot {
    fn new(n: usize) -> Result<Self> {
        let chi2 = ChiSquared::new((n - 1) as f64).map_err(|e| Error::domain(format!("chi-square df: {e}")))?;
        Ok(LocationScalePivot { n, chi2 })
    }

    /// Returns `(μ(Y,U), σ(Y,U))` for fresh `(U1, U2)`.
    fn solve(&self, mean: f64, sd: f64, stream: &mut UniformStream) -> (f64, f64) {
        let u1: f64 = StandardNormal.sample(stream);
        let u2 = (self.chi2.sample(stream) / (self.n - 1) as f64).sqrt();
        (mean - sd / (self.n as f64).sqrt() * (u1 / u2), sd / u2)
    }
}

#[derive(Debug, Clone)]
pub struct NormalKthSampler {
    mean: f64,
    sd: f64,
    m: u32,
    k: u32,
    pivot: LocationScalePivot,
}

#[derive(Debug, Clone)]
pub struct LogNormalMeanSampler {
    mean_log: f64,
    sd_log: f64,
    m: u32,
    pivot: LocationScalePivot,
}

#[derive(Debug, Clone)]
pub struct GammaSampler {
    n: usize,
    t1: f64,
    t2: f64,
    m: u32,
    cfg: GammaSolveConfig,
}

/// Endpoint sampler and modified sampler for binomial counts. Every draw of
/// either consumes exactly three uniforms so that the two stay aligned when
/// driven by identical streams.
#[derive(Debug, Clone, Copy)]
pub struct BinomialSampler {
    y: u64,
    n: u64,
    m: u64,
}

#[derive(Debug, Clone)]
pub struct PoissonArrivalSampler {
    t_n: f64,
    n: u64,
    k: u32,
    future: Gamma<f64>,
    past: Gamma<f64>,
}

/// A Monte Carlo generator for the predictive distribution of one model and
/// target. Binomial endpoint pairs are produced by [`BinomialSampler`]
/// through [`PairDrawSource`].
#[derive(Debug, Clone)]
pub enum MarginalSampler {
    Normal(NormalKthSampler),
    LogNormal(LogNormalMeanSampler),
    Gamma(GammaSampler),
    BinomialModified(BinomialSampler),
    PoissonArrival(PoissonArrivalSampler),
}

impl MarginalSampler {
    pub fn model(&self) -> ModelKind {
        match self {
            MarginalSampler::Normal(_) => ModelKind::Normal,
            MarginalSampler::LogNormal(_) => ModelKind::LogNormal,
            MarginalSampler::Gamma(_) => ModelKind::Gamma,
            MarginalSampler::BinomialModified(_) => ModelKind::Binomial,
            MarginalSampler::PoissonArrival(_) => ModelKind::PoissonProcess,
        }
    }

    /// Builds the sampler for `model` and `target` from raw data.
    pub fn build(model: ModelKind, data: &SampleData, target: PredictionTarget, cfg: &GammaSolveConfig) -> Result<Self> {
        target.validate()?;
        let mismatch = || Error::domain(format!("target {target} is not available for the {model} model"));
        match model {
            ModelKind::Normal => {
                let stats = SufficientStats::normal(data.values()?)?;
                let (m, k) = match target {
                    PredictionTarget::NextObservation => (1, 1),
                    PredictionTarget::KthLargestOfM { m, k } => (m, k),
                    _ => return Err(mismatch()),
                };
                normal_kth_of_m_sampler(&stats, m, k)
            }
            ModelKind::LogNormal => {
                let stats = SufficientStats::lognormal(data.values()?)?;
                let m = match target {
                    PredictionTarget::NextObservation => 1,
                    PredictionTarget::MeanOfM { m } => m,
                    _ => return Err(mismatch()),
                };
                lognormal_mean_of_m_sampler(&stats, m)
            }
            ModelKind::Gamma => {
                let stats = SufficientStats::gamma(data.values()?)?;
                gamma_sampler(&stats, target, cfg)
            }
            ModelKind::Binomial => {
                let (y, n) = match data {
                    SampleData::Count { y, n } => (*y, *n),
                    _ => return Err(Error::Data("binomial model needs a count y/n".into())),
                };
                let m = match target {
                    PredictionTarget::BinomialCountOfM { m } => m,
                    _ => return Err(mismatch()),
                };
                binomial_modified_sampler(y, n, m)
            }
            ModelKind::PoissonProcess => {
                let (t_n, n) = match data {
                    SampleData::Arrival { t_n, n } => (*t_n, *n),
                    _ => return Err(Error::Data("Poisson-process model needs an arrival time t_n/n".into())),
                };
                let k = match target {
                    PredictionTarget::ArrivalNPlusK { k } => k,
                    PredictionTarget::NextObservation => 1,
                    _ => return Err(mismatch()),
                };
                poisson_arrival_sampler(t_n, n, k)
            }
        }
    }

    /// Exact `G_Y(y)` where a closed form exists: the normal next
    /// observation and Poisson-process arrivals.
    pub fn exact_cdf(&self, y: f64) -> Option<f64> {
        match self {
            MarginalSampler::Normal(s) if s.m == 1 && s.k == 1 => {
                let n = s.pivot.n as f64;
                let z = (y - s.mean) / (s.sd * (1.0 + 1.0 / n).sqrt());
                DistSpec::StudentT { df: n - 1.0 }.cdf(z).ok()
            }
            MarginalSampler::PoissonArrival(s) => poisson_arrival_cdf(s.n, s.k, y, s.t_n).ok(),
            _ => None,
        }
    }
}

impl DrawSource for MarginalSampler {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64> {
        match self {
            MarginalSampler::Normal(s) => s.draw(stream),
            MarginalSampler::LogNormal(s) => s.draw(stream),
            MarginalSampler::Gamma(s) => s.draw(stream),
            MarginalSampler::BinomialModified(s) => s.draw_modified(stream),
            MarginalSampler::PoissonArrival(s) => s.draw(stream),
        }
    }

    fn is_discrete(&self) -> bool {
        matches!(self, MarginalSampler::BinomialModified(_))
    }
}

/// k-th largest of `m` future normal observations.
pub fn normal_kth_of_m_sampler(stats: &SufficientStats, m: u32, k: u32) -> Result<MarginalSampler> {
    let (n, mean, sd) = stats.location_parts()?;
    PredictionTarget::KthLargestOfM { m, k }.validate()?;
    Ok(MarginalSampler::Normal(NormalKthSampler {
        mean,
        sd,
        m,
        k,
        pivot: LocationScalePivot::new(n)?,
    }))
}

impl NormalKthSampler {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64> {
        let (mu, sigma) = self.pivot.solve(self.mean, self.sd, stream);
        let u_future = if self.m == 1 {
            StandardNormal.sample(stream)
        } else {
            let mut z: Vec<f64> = (0..self.m).map(|_| StandardNormal.sample(stream)).collect();
            // k-th largest = (m − k)-th smallest, zero based
            let idx = (self.m - self.k) as usize;
            *z.select_nth_unstable_by(idx, f64::total_cmp).1
        };
        Ok(mu + sigma * u_future)
    }
}

/// Arithmetic mean of `m` future log-normal observations; `stats` are on the
/// log scale.
pub fn lognormal_mean_of_m_sampler(stats: &SufficientStats, m: u32) -> Result<MarginalSampler> {
    let (n, mean, sd) = stats.location_parts()?;
    PredictionTarget::MeanOfM { m }.validate()?;
    Ok(MarginalSampler::LogNormal(LogNormalMeanSampler {
        mean_log: mean,
        sd_log: sd,
        m,
        pivot: LocationScalePivot::new(n)?,
    }))
}

impl LogNormalMeanSampler {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64> {
        let (mu, sigma) = self.pivot.solve(self.mean_log, self.sd_log, stream);
        let mut total = 0.0;
        for _ in 0..self.m {
            let z: f64 = StandardNormal.sample(stream);
            total += (mu + sigma * z).exp();
        }
        let v = total / self.m as f64;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric("log-normal draw overflowed".into()))
        }
    }
}

/// Next observation or maximum of `m` future gamma observations.
pub fn gamma_sampler(stats: &SufficientStats, target: PredictionTarget, cfg: &GammaSolveConfig) -> Result<MarginalSampler> {
    let (n, t1, t2) = stats.gamma_parts()?;
    cfg.validate()?;
    let m = match target {
        PredictionTarget::NextObservation => 1,
        PredictionTarget::MaxOfM { m } if m >= 1 => m,
        other => return Err(Error::domain(format!("target {other} is not available for the gamma model"))),
    };
    Ok(MarginalSampler::Gamma(GammaSampler { n, t1, t2, m, cfg: *cfg }))
}

impl GammaSampler {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64> {
        let u1 = stream.next_open01();
        let u2 = stream.next_open01();
        let sol = gamma_solver::solve(self.t1, self.t2, u1, u2, self.n, &self.cfg)?;
        let mut u_future = stream.next_open01();
        for _ in 1..self.m {
            u_future = u_future.max(stream.next_open01());
        }
        let v = sol.theta2 * gamma_quantile(sol.theta1, u_future)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric("gamma draw overflowed".into()))
        }
    }
}

fn check_count(y: u64, n: u64, m: u64) -> Result<()> {
    if n < 1 || m < 1 {
        return Err(Error::domain("binomial n and m must be at least 1"));
    }
    if y > n {
        return Err(Error::Data(format!("count y = {y} exceeds n = {n}")));
    }
    Ok(())
}

pub fn binomial_endpoint_sampler(y: u64, n: u64, m: u64) -> Result<BinomialSampler> {
    check_count(y, n, m)?;
    Ok(BinomialSampler { y, n, m })
}

pub fn binomial_modified_sampler(y: u64, n: u64, m: u64) -> Result<MarginalSampler> {
    Ok(MarginalSampler::BinomialModified(binomial_endpoint_sampler(y, n, m)?))
}

impl BinomialSampler {
    /// `(θ1, θ2)` endpoints of the θ-interval for auxiliary uniform `u`.
    pub fn theta_interval(&self, u: f64) -> Result<(f64, f64)> {
        let (y, n) = (self.y as f64, self.n as f64);
        let lo = if self.y == 0 { 0.0 } else { beta_quantile(y, n - y + 1.0, u)? };
        let hi = if self.y == self.n { 1.0 } else { beta_quantile(y + 1.0, n - y, u)? };
        Ok((lo, hi))
    }

    // Returns (θ1, θ2, v, w): v plays the role of 1 − Ũ, w positions θ̂.
    fn auxiliaries(&self, stream: &mut UniformStream) -> Result<(f64, f64, f64, f64)> {
        let u = stream.next_open01();
        let v = stream.next_open01();
        let w = stream.next_open01();
        let (lo, hi) = self.theta_interval(u)?;
        Ok((lo, hi, v, w))
    }

    fn draw_modified(&self, stream: &mut UniformStream) -> Result<f64> {
        let (lo, hi, v, w) = self.auxiliaries(stream)?;
        let theta = lo + (hi - lo) * w;
        Ok(binomial_quantile(self.m, theta, v)? as f64)
    }
}

impl PairDrawSource for BinomialSampler {
    fn draw_pair(&self, stream: &mut UniformStream) -> Result<(f64, f64)> {
        let (lo, hi, v, _) = self.auxiliaries(stream)?;
        Ok((
            binomial_quantile(self.m, lo, v)? as f64,
            binomial_quantile(self.m, hi, v)? as f64,
        ))
    }
}

fn check_poisson(n: u64, k: u32, t_n: f64) -> Result<()> {
    if n < 1 || k < 1 {
        return Err(Error::domain("Poisson-process n and k must be at least 1"));
    }
    if !(t_n > 0.0 && t_n.is_finite()) {
        return Err(Error::Data(format!("arrival time must be positive, got {t_n}")));
    }
    Ok(())
}

/// Quantile of the predicted `(n+k)`-th arrival time given the n-th arrival at `t_n`.
///
/// The marginal association is `t_n (1 + R)` with `R = G_k⁻¹(Ũ) / G_n⁻¹(U)`,
/// a ratio of independent Gamma(k) and Gamma(n) variables, so `R/(1+R)` is
/// Beta(k, n). For `k = 1` the quantile reduces to `(1 − w)^{−1/n} − 1`.
pub fn poisson_arrival_quantile(n: u64, k: u32, w: f64, t_n: f64) -> Result<f64> {
    check_poisson(n, k, t_n)?;
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Probability(w));
    }
    let r = if k == 1 {
        (-(-w).ln_1p() / n as f64).exp_m1()
    } else {
        let b = beta_quantile(k as f64, n as f64, w)?;
        b / (1.0 - b)
    };
    Ok(t_n * (1.0 + r))
}

/// `G(y) = P(t_n (1 + R) ≤ y)`.
pub fn poisson_arrival_cdf(n: u64, k: u32, y: f64, t_n: f64) -> Result<f64> {
    check_poisson(n, k, t_n)?;
    if y <= t_n {
        return Ok(0.0);
    }
    let r = y / t_n - 1.0;
    if r.is_infinite() {
        return Ok(1.0);
    }
    Ok(beta_inc(k as f64, n as f64, r / (1.0 + r))?.0)
}

pub fn poisson_arrival_sampler(t_n: f64, n: u64, k: u32) -> Result<MarginalSampler> {
    check_poisson(n, k, t_n)?;
    let future = Gamma::new(k as f64, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    let past = Gamma::new(n as f64, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok(MarginalSampler::PoissonArrival(PoissonArrivalSampler { t_n, n, k, future, past }))
}

impl PoissonArrivalSampler {
    fn draw(&self, stream: &mut UniformStream) -> Result<f64> {
        let num: f64 = self.future.sample(stream);
        let den: f64 = self.past.sample(stream);
        Ok(self.t_n * (1.0 + num / den))
    }
}
