//! Simulation checks of predictive validity.
//!
//! A scenario fixes a true model, a sample size and a prediction target.
//! Each replication simulates a data set and the future quantity from the
//! true law, builds the empirical predictive distribution from the data, and
//! records the PIT value `G_Y(Ỹ)` together with whether `Ỹ` fell inside the
//! prediction region.

use crate::assoc::{MarginalSampler, ModelKind, PredictionTarget, SampleData};
use crate::error::{Error, Result};
use crate::gamma_solver::GammaSolveConfig;
use crate::plaus::{build_empirical_g, DEFAULT_MC_DRAWS};
use crate::prs::{plausibility_from_g, AssertionKind};
use crate::rng::{f64_key, stream_id, UniformStream};
use rand_distr::{Binomial, Distribution, Gamma, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MIN_REPLICATIONS: usize = 100;

/// Generating law for simulated data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum TrueModel {
    Normal { mu: f64, sigma: f64 },
    /// Parameters of `ln Y`.
    LogNormal { mu: f64, sigma2: f64 },
    Gamma { shape: f64, scale: f64 },
    /// `n` of the scenario is the number of trials.
    Binomial { theta: f64 },
    /// `n` of the scenario is the index of the observed arrival.
    PoissonProcess { rate: f64 },
}

impl TrueModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrueModel::Normal { .. } => ModelKind::Normal,
            TrueModel::LogNormal { .. } => ModelKind::LogNormal,
            TrueModel::Gamma { .. } => ModelKind::Gamma,
            TrueModel::Binomial { .. } => ModelKind::Binomial,
            TrueModel::PoissonProcess { .. } => ModelKind::PoissonProcess,
        }
    }

    fn params(&self) -> [f64; 2] {
        match *self {
            TrueModel::Normal { mu, sigma } => [mu, sigma],
            TrueModel::LogNormal { mu, sigma2 } => [mu, sigma2],
            TrueModel::Gamma { shape, scale } => [shape, scale],
            TrueModel::Binomial { theta } => [theta, 0.0],
            TrueModel::PoissonProcess { rate } => [rate, 0.0],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TrueModel::Normal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            TrueModel::LogNormal { mu, sigma2 } => mu.is_finite() && sigma2 > 0.0 && sigma2.is_finite(),
            TrueModel::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            TrueModel::Binomial { theta } => (0.0..=1.0).contains(&theta),
            TrueModel::PoissonProcess { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("true parameters out of domain: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub truth: TrueModel,
    pub n: usize,
    pub target: PredictionTarget,
    pub alpha: f64,
    pub assertion: AssertionKind,
    pub replications: usize,
    pub mc_draws_per_rep: usize,
    pub base_seed: u64,
    pub solver: GammaSolveConfig,
}

impl SimScenario {
    pub fn new(truth: TrueModel, n: usize, target: PredictionTarget, assertion: AssertionKind, alpha: f64) -> Self {
        SimScenario {
            truth,
            n,
            target,
            alpha,
            assertion,
            replications: 1_000,
            mc_draws_per_rep: DEFAULT_MC_DRAWS,
            base_seed: 0,
            solver: GammaSolveConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        self.target.validate()?;
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::domain(format!(
                "at least {MIN_REPLICATIONS} replications are required, got {}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Probability(self.alpha));
        }
        let min_n = match self.truth {
            TrueModel::Binomial { .. } | TrueModel::PoissonProcess { .. } => 1,
            _ => 2,
        };
        if self.n < min_n {
            return Err(Error::domain(format!("sample size {} is too small", self.n)));
        }
        if self.mc_draws_per_rep == 0 {
            return Err(Error::domain("mc_draws_per_rep must be positive"));
        }
        Ok(())
    }

    /// Stream id of the cell, a function of the scenario coordinates only.
    pub fn cell_key(&self) -> u64 {
        let [p0, p1] = self.truth.params();
        let (tag, a, b) = match self.target {
            PredictionTarget::NextObservation => (0, 0, 0),
            PredictionTarget::KthLargestOfM { m, k } => (1, m as u64, k as u64),
            PredictionTarget::MeanOfM { m } => (2, m as u64, 0),
            PredictionTarget::MaxOfM { m } => (3, m as u64, 0),
            PredictionTarget::ArrivalNPlusK { k } => (4, k as u64, 0),
            PredictionTarget::BinomialCountOfM { m } => (5, m, 0),
        };
        let kind = AssertionKind::ALL.iter().position(|k| *k == self.assertion).unwrap_or(0) as u64;
        stream_id(&[
            self.truth.kind() as u64,
            f64_key(p0),
            f64_key(p1),
            self.n as u64,
            tag,
            a,
            b,
            f64_key(self.alpha),
            kind,
            self.mc_draws_per_rep as u64,
            self.solver.method as u64,
        ])
    }

    /// Simulates observed data and the future quantity.
    fn simulate(&self, stream: &mut UniformStream) -> Result<(SampleData, f64)> {
        let bad = |e: &dyn std::fmt::Display| Error::domain(e.to_string());
        let n = self.n;
        match self.truth {
            TrueModel::Normal { mu, sigma } => {
                let d = Normal::new(mu, sigma).map_err(|e| bad(&e))?;
                let data: Vec<f64> = (0..n).map(|_| d.sample(stream)).collect();
                Ok((SampleData::Values(data), self.future_continuous(&d, stream)?))
            }
            TrueModel::LogNormal { mu, sigma2 } => {
                let d = LogNormal::new(mu, sigma2.sqrt()).map_err(|e| bad(&e))?;
                let data: Vec<f64> = (0..n).map(|_| d.sample(stream)).collect();
                Ok((SampleData::Values(data), self.future_continuous(&d, stream)?))
            }
            TrueModel::Gamma { shape, scale } => {
                let d = Gamma::new(shape, scale).map_err(|e| bad(&e))?;
                let data: Vec<f64> = (0..n).map(|_| d.sample(stream)).collect();
                Ok((SampleData::Values(data), self.future_continuous(&d, stream)?))
            }
            TrueModel::Binomial { theta } => {
                let m = match self.target {
                    PredictionTarget::BinomialCountOfM { m } => m,
                    other => return Err(Error::domain(format!("target {other} is not available for binomial data"))),
                };
                let y = Binomial::new(n as u64, theta).map_err(|e| bad(&e))?.sample(stream);
                let future = Binomial::new(m, theta).map_err(|e| bad(&e))?.sample(stream);
                Ok((SampleData::Count { y, n: n as u64 }, future as f64))
            }
            TrueModel::PoissonProcess { rate } => {
                let k = match self.target {
                    PredictionTarget::ArrivalNPlusK { k } => k,
                    PredictionTarget::NextObservation => 1,
                    other => return Err(Error::domain(format!("target {other} is not available for arrival data"))),
                };
                let t_n = Gamma::new(n as f64, 1.0 / rate).map_err(|e| bad(&e))?.sample(stream);
                let gap = Gamma::new(k as f64, 1.0 / rate).map_err(|e| bad(&e))?.sample(stream);
                Ok((SampleData::Arrival { t_n, n: n as u64 }, t_n + gap))
            }
        }
    }

    fn future_continuous<D: Distribution<f64>>(&self, d: &D, stream: &mut UniformStream) -> Result<f64> {
        let mut draw = |count: u32| -> Vec<f64> { (0..count).map(|_| d.sample(stream)).collect() };
        Ok(match self.target {
            PredictionTarget::NextObservation => draw(1)[0],
            PredictionTarget::MeanOfM { m } => draw(m).iter().sum::<f64>() / m as f64,
            PredictionTarget::MaxOfM { m } => draw(m).into_iter().fold(f64::NEG_INFINITY, f64::max),
            PredictionTarget::KthLargestOfM { m, k } => {
                let mut v = draw(m);
                v.sort_by(|a, b| b.total_cmp(a));
                v[(k - 1) as usize]
            }
            other => return Err(Error::domain(format!("target {other} needs discrete or arrival data"))),
        })
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RepOutcome {
    pit: f64,
    covered: bool,
    low_plausibility: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `G_Y(Ỹ)` per replication, in replication order.
    pub pit_samples: Vec<f64>,
    pub ks_statistic: f64,
    pub coverage_estimate: f64,
    pub mc_standard_error: f64,
    /// Fraction of replications with `pl_Y(Ỹ) ≤ α`.
    pub low_plausibility_rate: f64,
    pub replications: usize,
}

fn run_replication(sc: &SimScenario, cell: u64, rep: u64) -> Result<RepOutcome> {
    let mut data_stream = UniformStream::new(sc.base_seed, stream_id(&[cell, rep]));
    let mut mc_stream = data_stream.substream(&[1]);
    let (data, future) = sc.simulate(&mut data_stream)?;
    let sampler = MarginalSampler::build(sc.truth.kind(), &data, sc.target, &sc.solver)?;
    let g = build_empirical_g(&sampler, sc.mc_draws_per_rep, &mut mc_stream)?;
    let pit = g.eval(future);
    let region = g.region(sc.assertion, sc.alpha)?;
    Ok(RepOutcome {
        pit,
        covered: region.contains(future),
        low_plausibility: plausibility_from_g(pit, sc.assertion)? <= sc.alpha,
    })
}

fn run(sc: &SimScenario) -> Result<Vec<RepOutcome>> {
    sc.validate()?;
    let cell = sc.cell_key();
    (0..sc.replications as u64)
        .into_par_iter()
        .map(|rep| {
            run_replication(sc, cell, rep).map_err(|e| Error::Replication {
                index: rep,
                source: Box::new(e),
            })
        })
        .collect()
}

fn report(outcomes: &[RepOutcome]) -> ValidityReport {
    let reps = outcomes.len();
    let pit_samples: Vec<f64> = outcomes.iter().map(|o| o.pit).collect();
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let low = outcomes.iter().filter(|o| o.low_plausibility).count();
    let cov = covered as f64 / reps as f64;
    ValidityReport {
        ks_statistic: ks_uniform(&pit_samples),
        pit_samples,
        coverage_estimate: cov,
        mc_standard_error: (cov * (1.0 - cov) / reps as f64).sqrt(),
        low_plausibility_rate: low as f64 / reps as f64,
        replications: reps,
    }
}

/// PIT study: distribution of `G_Y(Ỹ)` over replications.
pub fn pit_study(sc: &SimScenario) -> Result<ValidityReport> {
    Ok(report(&run(sc)?))
}

/// Coverage study: how often `Ỹ` falls in the prediction region.
///
/// Shares replications with [`pit_study`], so both fields of the report are
/// always filled.
pub fn coverage_study(sc: &SimScenario) -> Result<ValidityReport> {
    pit_study(sc)
}

/// Kolmogorov–Smirnov distance of a sample to Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let x = x.clamp(0.0, 1.0);
        d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
    })
}

/// Asymptotic critical value of the one-sample KS statistic at `level`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-(0.5 * level).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub scenario: SimScenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs every cell; a failing cell is recorded and the others continue.
pub fn grid_runner(grid: &[SimScenario]) -> Result<Vec<CellResult>> {
    if grid.is_empty() {
        return Err(Error::domain("simulation grid is empty"));
    }
    Ok(grid
        .par_iter()
        .map(|sc| match coverage_study(sc) {
            Ok(r) => CellResult {
                scenario: *sc,
                report: Some(r),
                error: None,
            },
            Err(e) => CellResult {
                scenario: *sc,
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// Log-normal coverage grid. The scaled grid has 16 cells; `long_run`
/// gives the full factorial design with 10,000 replications.
pub fn lognormal_grid(assertion: AssertionKind, long_run: bool, base_seed: u64) -> Vec<SimScenario> {
    let (mus, s2s, ns, ms, reps): (&[f64], &[f64], &[usize], &[u32], usize) = if long_run {
        (&[2.0, 3.0, 10.0], &[0.0625, 0.2, 0.5, 1.0, 2.0, 10.0], &[5, 10, 20, 30, 100], &[1, 5, 10], 10_000)
    } else {
        (&[2.0, 3.0], &[0.5, 10.0], &[10, 30], &[1, 5], 1_000)
    };
    let mut grid = Vec::new();
    for &mu in mus {
        for &sigma2 in s2s {
            for &n in ns {
                for &m in ms {
                    let mut sc = SimScenario::new(
                        TrueModel::LogNormal { mu, sigma2 },
                        n,
                        PredictionTarget::MeanOfM { m },
                        assertion,
                        0.10,
                    );
                    sc.replications = reps;
                    sc.base_seed = base_seed;
                    grid.push(sc);
                }
            }
        }
    }
    grid
}

/// Gamma coverage grid with scale 1. The scaled grid has 8 cells.
pub fn gamma_grid(assertion: AssertionKind, long_run: bool, base_seed: u64, mc_draws: usize) -> Vec<SimScenario> {
    let (ns, shapes, reps): (&[usize], &[f64], usize) = if long_run {
        (&[10, 25, 125], &[0.5, 1.0, 5.0, 10.0], 10_000)
    } else {
        (&[10, 25], &[0.5, 5.0], 1_000)
    };
    let mut grid = Vec::new();
    for &n in ns {
        for &shape in shapes {
            for m in [1u32, 5] {
                let target = if m == 1 {
                    PredictionTarget::NextObservation
                } else {
                    PredictionTarget::MaxOfM { m }
                };
                let mut sc = SimScenario::new(TrueModel::Gamma { shape, scale: 1.0 }, n, target, assertion, 0.10);
                sc.replications = reps;
                sc.mc_draws_per_rep = mc_draws;
                sc.base_seed = base_seed;
                grid.push(sc);
            }
        }
    }
    grid
}

/// Binomial upper 95% limits with `n = m = 100`.
pub fn binomial_grid(long_run: bool, base_seed: u64, mc_draws: usize) -> Vec<SimScenario> {
    let (thetas, reps): (Vec<f64>, usize) = if long_run {
        ((1..20).map(|i| i as f64 * 0.05).collect(), 2_500)
    } else {
        (vec![0.1, 0.3, 0.5, 0.7, 0.9], 500)
    };
    thetas
        .into_iter()
        .map(|theta| {
            let mut sc = SimScenario::new(
                TrueModel::Binomial { theta },
                100,
                PredictionTarget::BinomialCountOfM { m: 100 },
                AssertionKind::RightSided,
                0.05,
            );
            sc.replications = reps;
            sc.mc_draws_per_rep = mc_draws;
            sc.base_seed = base_seed;
            sc
        })
        .collect()
}
