use crate::args::{AnalysisArgs, Common, DatasetsArgs, Format, Grid, Method, SimArgs};
use crate::svg;
use impred::assoc::binomial_endpoint_sampler;
use impred::data::{self, BundledDataset};
use impred::plaus::{build_empirical_g, build_paired_empirical_g};
use impred::validity::{self, CellResult, SimScenario, TrueModel, ValidityReport};
use impred::{
    AssertionKind, GammaSolveConfig, MarginalSampler, ModelKind, PlausibilityCurve, PredictionRegion, PredictionTarget,
    SampleData, SolveMethod, UniformStream,
};
use serde::Serialize;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] impred::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Serialize)]
struct Output<'a> {
    version: &'static str,
    command: &'a str,
    model: String,
    target: String,
    assertion: AssertionKind,
    alpha: f64,
    mc_draws: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<SolveMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<PredictionRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<PlausibilityCurve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<SimScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<CellResult>>,
}

fn json(out: &Output) -> Result<String> {
    let mut s = serde_json::to_string_pretty(out).map_err(|e| usage(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn solver(method: Method) -> GammaSolveConfig {
    GammaSolveConfig::with_method(match method {
        Method::GammaMatched => SolveMethod::GammaMatchedApprox,
        Method::Normal => SolveMethod::NormalApprox,
        Method::McBisection => SolveMethod::McBisection,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn parse_pair(flag: &str, s: &str) -> Result<(String, String)> {
    s.split_once('/')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| usage(format!("--{flag} expects A/B, got '{s}'")))
}

struct Analysis {
    model: ModelKind,
    data: SampleData,
    target: PredictionTarget,
    assertion: AssertionKind,
}

fn resolve(a: &AnalysisArgs) -> Result<Analysis> {
    let c = &a.common;
    let model: ModelKind = c.model.as_deref().ok_or_else(|| usage("--model is required"))?.parse().map_err(usage_from)?;
    let assertion: AssertionKind = c.assertion.parse().map_err(usage_from)?;
    let explicit = c.target.as_deref().map(str::parse::<PredictionTarget>).transpose().map_err(usage_from)?;
    let (data, default_target) = match model {
        ModelKind::Binomial => {
            let (y, n) = parse_pair("count", a.count.as_deref().ok_or_else(|| usage("binomial needs --count Y/N"))?)?;
            let y = y.parse().map_err(|_| usage(format!("bad count '{y}'")))?;
            let n = n.parse().map_err(|_| usage(format!("bad trial number '{n}'")))?;
            let t = a.future_trials.map(|m| PredictionTarget::BinomialCountOfM { m });
            (SampleData::Count { y, n }, t)
        }
        ModelKind::PoissonProcess => {
            let (t, n) =
                parse_pair("arrival", a.arrival.as_deref().ok_or_else(|| usage("poisson_process needs --arrival T/N"))?)?;
            let t_n = t.parse().map_err(|_| usage(format!("bad arrival time '{t}'")))?;
            let n = n.parse().map_err(|_| usage(format!("bad arrival index '{n}'")))?;
            (SampleData::Arrival { t_n, n }, Some(PredictionTarget::ArrivalNPlusK { k: 1 }))
        }
        _ => {
            let values = if let Some(path) = &a.input {
                data::ingest(path)?
            } else if let Some(d) = &a.data {
                match d.parse::<BundledDataset>() {
                    Ok(b) => b.values().to_vec(),
                    Err(_) => data::ingest(d)?,
                }
            } else {
                return Err(usage("this model needs --data or --input"));
            };
            (SampleData::Values(values), Some(PredictionTarget::NextObservation))
        }
    };
    if a.future_trials.is_some() && model != ModelKind::Binomial {
        return Err(usage("--future-trials applies to the binomial model only"));
    }
    let target = match (explicit, default_target) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(usage("binomial needs --future-trials M or --target count-of-m:M")),
    };
    Ok(Analysis {
        model,
        data,
        target,
        assertion,
    })
}

fn usage_from(e: impred::Error) -> CliError {
    usage(e.to_string())
}

fn build_sampler(an: &Analysis, cfg: &GammaSolveConfig) -> Result<MarginalSampler> {
    MarginalSampler::build(an.model, &an.data, an.target, cfg).map_err(|e| {
        if e.is_numeric() {
            CliError::Core(e)
        } else {
            usage(e.to_string())
        }
    })
}

fn curve_for(g: &impred::EmpiricalG, assertion: AssertionKind, points: usize) -> Result<PlausibilityCurve> {
    let draws = g.draws();
    let grid = if g.is_discrete() && draws[draws.len() - 1] - draws[0] < points as f64 {
        let (lo, hi) = (draws[0] as i64 - 1, draws[draws.len() - 1] as i64 + 1);
        (lo.max(0)..=hi).map(|k| k as f64).collect()
    } else {
        g.default_grid(points)
    };
    Ok(g.curve(assertion, &grid)?)
}

fn analysis(command: &str, a: &AnalysisArgs) -> Result<String> {
    let c = &a.common;
    check_alpha(c.alpha)?;
    if a.grid_points < 2 {
        return Err(usage("--grid-points must be at least 2"));
    }
    let an = resolve(a)?;
    let cfg = solver(c.method);
    let mut stream = UniformStream::new(c.seed, 0);
    let paired = an.model == ModelKind::Binomial && !a.modified && command == "interval";
    let (region, curve) = if paired {
        let SampleData::Count { y, n } = an.data else { unreachable!() };
        let PredictionTarget::BinomialCountOfM { m } = an.target else {
            return Err(usage(format!("target {} is not available for the binomial model", an.target)));
        };
        let s = binomial_endpoint_sampler(y, n, m).map_err(usage_from)?;
        let g = build_paired_empirical_g(&s, c.mc_draws, &mut stream)?;
        let region = g.region(an.assertion, c.alpha).map_err(usage_from)?;
        let curve = if c.format == Format::Svg {
            let mut s2 = UniformStream::new(c.seed, 0);
            let modified = MarginalSampler::build(an.model, &an.data, an.target, &cfg)?;
            Some(curve_for(&build_empirical_g(&modified, c.mc_draws, &mut s2)?, an.assertion, a.grid_points)?)
        } else {
            None
        };
        (Some(region), curve)
    } else {
        let sampler = build_sampler(&an, &cfg)?;
        let g = build_empirical_g(&sampler, c.mc_draws, &mut stream)?;
        if command == "interval" {
            let region = g.region(an.assertion, c.alpha).map_err(usage_from)?;
            let curve = if c.format == Format::Svg {
                Some(curve_for(&g, an.assertion, a.grid_points)?)
            } else {
                None
            };
            (Some(region), curve)
        } else {
            (None, Some(curve_for(&g, an.assertion, a.grid_points)?))
        }
    };
    let title = format!("{} {} {}", an.model, an.target, an.assertion);
    match c.format {
        Format::Svg => Ok(svg::render(curve.as_ref().expect("curve built for svg"), Some(c.alpha), &title)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if let Some(r) = region {
                w.write_record(["model", "target", "assertion", "alpha", "mc_draws", "seed", "lower", "upper"])?;
                w.write_record([
                    an.model.to_string(),
                    an.target.to_string(),
                    an.assertion.to_string(),
                    c.alpha.to_string(),
                    c.mc_draws.to_string(),
                    c.seed.to_string(),
                    r.lower.to_string(),
                    r.upper.to_string(),
                ])?;
            } else if let Some(cv) = &curve {
                w.write_record(["y", "plausibility"])?;
                for (y, p) in &cv.points {
                    w.write_record([y.to_string(), p.to_string()])?;
                }
            }
            into_string(w)
        }
        Format::Json => json(&Output {
            version: VERSION,
            command,
            model: an.model.to_string(),
            target: an.target.to_string(),
            assertion: an.assertion,
            alpha: c.alpha,
            mc_draws: c.mc_draws,
            seed: c.seed,
            method: (an.model == ModelKind::Gamma).then_some(cfg.method),
            region: if command == "interval" { region } else { None },
            curve: if command == "plaus" { curve } else { None },
            scenario: None,
            report: None,
            cells: None,
        }),
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn plaus(a: &AnalysisArgs) -> Result<String> {
    analysis("plaus", a)
}

pub fn interval(a: &AnalysisArgs) -> Result<String> {
    analysis("interval", a)
}

fn need(v: Option<f64>, flag: &str, model: ModelKind) -> Result<f64> {
    v.ok_or_else(|| usage(format!("the {model} model needs --{flag}")))
}

fn scenario(s: &SimArgs) -> Result<SimScenario> {
    let c = &s.common;
    check_alpha(c.alpha)?;
    let model: ModelKind = c.model.as_deref().ok_or_else(|| usage("--model or --grid is required"))?.parse().map_err(usage_from)?;
    let n = s.n.ok_or_else(|| usage("--n is required"))?;
    let truth = match model {
        ModelKind::Normal => TrueModel::Normal {
            mu: need(s.mu, "mu", model)?,
            sigma: need(s.sigma, "sigma", model)?,
        },
        ModelKind::LogNormal => TrueModel::LogNormal {
            mu: need(s.mu, "mu", model)?,
            sigma2: need(s.sigma2, "sigma2", model)?,
        },
        ModelKind::Gamma => TrueModel::Gamma {
            shape: need(s.shape, "shape", model)?,
            scale: s.scale.unwrap_or(1.0),
        },
        ModelKind::Binomial => TrueModel::Binomial {
            theta: need(s.theta, "theta", model)?,
        },
        ModelKind::PoissonProcess => TrueModel::PoissonProcess {
            rate: need(s.rate, "rate", model)?,
        },
    };
    let target = match c.target.as_deref() {
        Some(t) => t.parse().map_err(usage_from)?,
        None => match model {
            ModelKind::Binomial => PredictionTarget::BinomialCountOfM { m: n as u64 },
            ModelKind::PoissonProcess => PredictionTarget::ArrivalNPlusK { k: 1 },
            _ => PredictionTarget::NextObservation,
        },
    };
    let assertion = c.assertion.parse().map_err(usage_from)?;
    let mut sc = SimScenario::new(truth, n, target, assertion, c.alpha);
    sc.replications = s.reps;
    sc.mc_draws_per_rep = c.mc_draws;
    sc.base_seed = c.seed;
    sc.solver = solver(c.method);
    sc.validate().map_err(usage_from)?;
    Ok(sc)
}

fn sim_output(command: &'static str, sc: &SimScenario, report: ValidityReport) -> Output<'static> {
    Output {
        version: VERSION,
        command,
        model: sc.truth.kind().to_string(),
        target: sc.target.to_string(),
        assertion: sc.assertion,
        alpha: sc.alpha,
        mc_draws: sc.mc_draws_per_rep,
        seed: sc.base_seed,
        method: (sc.truth.kind() == ModelKind::Gamma).then_some(sc.solver.method),
        region: None,
        curve: None,
        scenario: Some(*sc),
        report: Some(report),
        cells: None,
    }
}

pub fn pit(s: &SimArgs) -> Result<String> {
    if s.grid.is_some() {
        return Err(usage("--grid is available for coverage only"));
    }
    let sc = scenario(s)?;
    let report = validity::pit_study(&sc)?;
    match s.common.format {
        Format::Json => json(&sim_output("pit", &sc, report)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["replication", "pit"])?;
            for (i, p) in report.pit_samples.iter().enumerate() {
                w.write_record([i.to_string(), p.to_string()])?;
            }
            into_string(w)
        }
        Format::Svg => Err(usage("svg output is available for plaus and interval")),
    }
}

fn grid_cells(s: &SimArgs, grid: Grid) -> Result<Vec<SimScenario>> {
    let c = &s.common;
    let assertion: AssertionKind = c.assertion.parse().map_err(usage_from)?;
    let mut cells = match grid {
        Grid::Lognormal => validity::lognormal_grid(assertion, s.long_run, c.seed),
        Grid::Gamma => validity::gamma_grid(assertion, s.long_run, c.seed, c.mc_draws),
        Grid::Binomial => validity::binomial_grid(s.long_run, c.seed, c.mc_draws),
    };
    for sc in cells.iter_mut() {
        sc.mc_draws_per_rep = c.mc_draws;
        sc.solver = solver(c.method);
    }
    Ok(cells)
}

const CELL_HEADER: [&str; 15] = [
    "model",
    "param1",
    "param2",
    "n",
    "target",
    "assertion",
    "alpha",
    "replications",
    "mc_draws",
    "seed",
    "coverage",
    "se",
    "ks",
    "low_plausibility_rate",
    "error",
];

fn cell_record(cell: &CellResult) -> Vec<String> {
    let sc = &cell.scenario;
    let (p1, p2) = match sc.truth {
        TrueModel::Normal { mu, sigma } => (mu, sigma),
        TrueModel::LogNormal { mu, sigma2 } => (mu, sigma2),
        TrueModel::Gamma { shape, scale } => (shape, scale),
        TrueModel::Binomial { theta } => (theta, f64::NAN),
        TrueModel::PoissonProcess { rate } => (rate, f64::NAN),
    };
    let opt = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    let mut rec = vec![
        sc.truth.kind().to_string(),
        opt(p1),
        opt(p2),
        sc.n.to_string(),
        sc.target.to_string(),
        sc.assertion.to_string(),
        sc.alpha.to_string(),
        sc.replications.to_string(),
        sc.mc_draws_per_rep.to_string(),
        sc.base_seed.to_string(),
    ];
    match &cell.report {
        Some(r) => rec.extend([
            r.coverage_estimate.to_string(),
            r.mc_standard_error.to_string(),
            r.ks_statistic.to_string(),
            r.low_plausibility_rate.to_string(),
            String::new(),
        ]),
        None => rec.extend([
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            cell.error.clone().unwrap_or_default(),
        ]),
    }
    rec
}

fn cells_csv(cells: &[CellResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CELL_HEADER)?;
    for c in cells {
        w.write_record(cell_record(c))?;
    }
    into_string(w)
}

pub fn coverage(s: &SimArgs) -> Result<String> {
    if s.common.format == Format::Svg {
        return Err(usage("svg output is available for plaus and interval"));
    }
    if let Some(grid) = s.grid {
        let cells = validity::grid_runner(&grid_cells(s, grid)?)?;
        return match s.common.format {
            Format::Csv => cells_csv(&cells),
            _ => {
                let first = cells[0].scenario;
                json(&Output {
                    version: VERSION,
                    command: "coverage",
                    model: first.truth.kind().to_string(),
                    target: "grid".into(),
                    assertion: first.assertion,
                    alpha: first.alpha,
                    mc_draws: first.mc_draws_per_rep,
                    seed: first.base_seed,
                    method: None,
                    region: None,
                    curve: None,
                    scenario: None,
                    report: None,
                    cells: Some(cells),
                })
            }
        };
    }
    let sc = scenario(s)?;
    let report = validity::coverage_study(&sc)?;
    match s.common.format {
        Format::Csv => cells_csv(&[CellResult {
            scenario: sc,
            report: Some(report),
            error: None,
        }]),
        _ => json(&sim_output("coverage", &sc, report)),
    }
}

#[derive(Serialize)]
struct DatasetEntry {
    name: &'static str,
    description: &'static str,
    n: usize,
    values: &'static [f64],
}

pub fn datasets(d: &DatasetsArgs) -> Result<String> {
    match d.format {
        Format::Json => {
            let list: Vec<DatasetEntry> = BundledDataset::ALL
                .iter()
                .map(|b| DatasetEntry {
                    name: b.name(),
                    description: b.description(),
                    n: b.values().len(),
                    values: b.values(),
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&list).map_err(|e| usage(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["dataset", "index", "value"])?;
            for b in BundledDataset::ALL {
                for (i, v) in b.values().iter().enumerate() {
                    w.write_record([b.name().to_string(), (i + 1).to_string(), v.to_string()])?;
                }
            }
            into_string(w)
        }
        Format::Svg => Err(usage("svg output is available for plaus and interval")),
    }
}

pub fn common(cmd: &crate::args::Command) -> Option<&Common> {
    use crate::args::Command::*;
    match cmd {
        Plaus(a) | Interval(a) => Some(&a.common),
        Pit(s) | Coverage(s) => Some(&s.common),
        Datasets(_) => None,
    }
}
