//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run a subset by number: `cargo test -p impred-core --test acceptance -- 3 8`.

use impred::assoc::{binomial_endpoint_sampler, normal_kth_of_m_sampler, poisson_arrival_quantile};
use impred::data::BundledDataset;
use impred::gamma_solver::{approx_cdf_t2, solve_theta1};
use impred::plaus::{build_empirical_g, build_paired_empirical_g};
use impred::special::digamma;
use impred::validity::{
    binomial_grid, coverage_study, gamma_grid, grid_runner, ks_critical_value, lognormal_grid, pit_study, SimScenario,
    TrueModel,
};
use impred::{
    AssertionKind, GammaSolveConfig, MarginalSampler, ModelKind, PredictionTarget, SampleData, SolveMethod,
    SufficientStats, UniformStream,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const SEED: u64 = 20_140_101;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within_time(v: Verdict, elapsed: Duration, limit: Duration) -> Verdict {
    if elapsed <= limit {
        v
    } else {
        verdict(false, format!("{} (runtime {elapsed:.1?} exceeds {limit:?})", v.detail))
    }
}

fn timed(limit_secs: u64, f: impl FnOnce() -> Verdict) -> Verdict {
    let t = Instant::now();
    let v = f();
    within_time(v, t.elapsed(), Duration::from_secs(limit_secs))
}

fn values(d: BundledDataset) -> SampleData {
    SampleData::Values(d.values().to_vec())
}

fn soil_bound() -> f64 {
    let s = MarginalSampler::build(
        ModelKind::LogNormal,
        &values(BundledDataset::SoilLeadOffsite),
        PredictionTarget::MeanOfM { m: 5 },
        &GammaSolveConfig::default(),
    )
    .unwrap();
    let g = build_empirical_g(&s, 100_000, &mut UniformStream::new(SEED, 1)).unwrap();
    g.region(AssertionKind::RightSided, 0.05).unwrap().upper
}

fn c1_lognormal_soil() -> Verdict {
    timed(10, || {
        let ub = soil_bound();
        let rel = ub / 136.16 - 1.0;
        verdict(rel.abs() <= 0.02, format!("upper bound {ub:.2} mg/kg vs 136.16 ({:+.2}%)", 100.0 * rel))
    })
}

fn breakdown_bound() -> f64 {
    let cfg = GammaSolveConfig::with_method(SolveMethod::GammaMatchedApprox);
    let s = MarginalSampler::build(
        ModelKind::Gamma,
        &values(BundledDataset::MachineBreakdowns),
        PredictionTarget::MaxOfM { m: 5 },
        &cfg,
    )
    .unwrap();
    let g = build_empirical_g(&s, 100_000, &mut UniformStream::new(SEED, 2)).unwrap();
    g.region(AssertionKind::LeftSided, 0.10).unwrap().lower
}

fn c2_gamma_breakdowns() -> Verdict {
    timed(60, || {
        let lb = breakdown_bound();
        let rel = lb / 73.53 - 1.0;
        verdict(rel.abs() <= 0.02, format!("lower bound {lb:.2} h vs 73.53 ({:+.2}%)", 100.0 * rel))
    })
}

fn c3_binomial_hearing() -> Verdict {
    timed(5, || {
        let s = binomial_endpoint_sampler(23, 23_061, 12_694).unwrap();
        let g = build_paired_empirical_g(&s, 10_000, &mut UniformStream::new(SEED, 3)).unwrap();
        let r = g.region(AssertionKind::Singleton, 0.10).unwrap();
        verdict(r.lower == 6.0 && r.upper == 21.0, format!("interval ({}, {}) vs (6, 21)", r.lower, r.upper))
    })
}

fn c4_normal_closed_form() -> Verdict {
    let mut pick = UniformStream::new(SEED, 4);
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for case in 0..20u64 {
        let n = 10 + (pick.next_open01() * 50.0) as usize;
        let mean = -50.0 + 100.0 * pick.next_open01();
        let sd = (pick.next_open01() * 6.0 - 3.0).exp();
        let alpha = 0.05 + 0.25 * pick.next_open01();
        let stats = SufficientStats::location(n, mean, sd).unwrap();
        let s = normal_kth_of_m_sampler(&stats, 1, 1).unwrap();
        let g = build_empirical_g(&s, 1_000_000, &mut UniformStream::new(SEED, 400 + case)).unwrap();
        let r = g.region(AssertionKind::Singleton, alpha).unwrap();
        let student = StudentsT::new(0.0, 1.0, (n - 1) as f64).unwrap();
        let t = student.inverse_cdf(1.0 - alpha / 2.0);
        let scale = sd * (1.0 + 1.0 / n as f64).sqrt();
        let half = t * scale;
        let err = ((r.lower - (mean - half)).abs()).max((r.upper - (mean + half)).abs()) / sd;
        // standard error of an empirical quantile at the tail probability alpha/2
        let se = (0.5 * alpha * (1.0 - 0.5 * alpha) / 1e6).sqrt() / student.pdf(t) * scale / sd;
        worst = worst.max(err);
        worst_z = worst_z.max(err / se);
    }
    verdict(
        worst <= 0.005,
        format!(
            "worst endpoint error {:.3}% of sd over 20 cases (largest error is {worst_z:.2} Monte Carlo standard errors)",
            100.0 * worst
        ),
    )
}

fn c5_pit_lognormal() -> Verdict {
    timed(300, || {
        let mut sc = SimScenario::new(
            TrueModel::LogNormal { mu: 2.173, sigma2: 2.3808 },
            15,
            PredictionTarget::MeanOfM { m: 5 },
            AssertionKind::RightSided,
            0.05,
        );
        sc.replications = 2_000;
        sc.base_seed = SEED;
        let r = pit_study(&sc).unwrap();
        let crit = ks_critical_value(2_000, 0.01);
        verdict(r.ks_statistic < crit, format!("KS {:.4} vs 1% critical value {crit:.4}", r.ks_statistic))
    })
}

const GAMMA_GRID_DRAWS: usize = 2_000;
const BINOMIAL_GRID_DRAWS: usize = 2_000;

fn c6_coverage_grids() -> Verdict {
    timed(1_800, || {
        let mut grid = lognormal_grid(AssertionKind::RightSided, false, SEED);
        grid.extend(lognormal_grid(AssertionKind::LeftSided, false, SEED));
        grid.extend(gamma_grid(AssertionKind::LeftSided, false, SEED, GAMMA_GRID_DRAWS));
        let cells = grid_runner(&grid).unwrap();
        let tol = 3.0 * (0.9f64 * 0.1 / 1_000.0).sqrt();
        let mut bad = Vec::new();
        let mut extreme: f64 = 0.0;
        for c in &cells {
            match (&c.report, &c.error) {
                (Some(r), _) => {
                    extreme = extreme.max((r.coverage_estimate - 0.9).abs());
                    if (r.coverage_estimate - 0.9).abs() > tol {
                        bad.push(format!("{:?} n={} {}: {:.3}", c.scenario.truth, c.scenario.n, c.scenario.target, r.coverage_estimate));
                    }
                }
                (None, e) => bad.push(e.clone().unwrap_or_default()),
            }
        }
        verdict(
            bad.is_empty(),
            format!(
                "{} cells, max |coverage - 0.90| = {extreme:.4} (tolerance {tol:.4}){}",
                cells.len(),
                if bad.is_empty() { String::new() } else { format!("; outside: {}", bad.join("; ")) }
            ),
        )
    })
}

fn c7_binomial_validity() -> Verdict {
    let cells = grid_runner(&binomial_grid(false, SEED, BINOMIAL_GRID_DRAWS)).unwrap();
    let floor = 0.95 - 3.0 * (0.95f64 * 0.05 / 500.0).sqrt();
    let mut ok = true;
    let mut parts = Vec::new();
    for c in &cells {
        let theta = match c.scenario.truth {
            TrueModel::Binomial { theta } => theta,
            _ => unreachable!(),
        };
        match (&c.report, &c.error) {
            (Some(r), _) => {
                ok &= r.coverage_estimate >= floor;
                parts.push(format!("θ={theta}: {:.3}", r.coverage_estimate));
            }
            (None, e) => {
                ok = false;
                parts.push(format!("θ={theta}: {}", e.clone().unwrap_or_default()));
            }
        }
    }
    verdict(ok, format!("coverage {} (floor {floor:.4})", parts.join(", ")))
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

const POISSON_W: [f64; 3] = [0.1, 0.5, 0.9];

fn c8a_poisson_vs_literal_density() -> Verdict {
    // CDF of the density proportional to (1+r)^{-(n+k)}, by quadrature after
    // the substitution s = 1/(1+r).
    let mut failing = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=10u64 {
        for k in 1..=10u32 {
            let p = (n + k as u64) as i32;
            let dens = move |s: f64| s.powi(p - 2);
            let total = simpson(&dens, 0.0, 1.0, 1e-15);
            let mut pair_err: f64 = 0.0;
            for w in POISSON_W {
                let r = poisson_arrival_quantile(n, k, w, 1.0).unwrap() - 1.0;
                let cdf = simpson(&dens, 1.0 / (1.0 + r), 1.0, 1e-15) / total;
                pair_err = pair_err.max((cdf - w).abs());
            }
            worst = worst.max(pair_err);
            if pair_err > 1e-10 {
                failing.push((n, k));
            }
        }
    }
    verdict(
        failing.is_empty(),
        format!(
            "{} of 100 (n,k) pairs disagree beyond 1e-10 (worst |F(q) - w| = {worst:.3e}); all failures have k >= 2: {}",
            failing.len(),
            failing.iter().all(|&(_, k)| k >= 2)
        ),
    )
}

fn c8b_poisson_vs_simulation() -> Verdict {
    let draws = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut at = (0, 0, 0.0);
    for n in 1..=10u64 {
        for k in 1..=10u32 {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (n << 8) ^ k as u64);
            let gk = Gamma::new(k as f64, 1.0).unwrap();
            let gn = Gamma::new(n as f64, 1.0).unwrap();
            let mut r: Vec<f64> = (0..draws).map(|_| gk.sample(&mut rng) / gn.sample(&mut rng)).collect();
            for w in POISSON_W {
                let idx = (w * draws as f64) as usize;
                let sim = *r.select_nth_unstable_by(idx, f64::total_cmp).1;
                let exact = poisson_arrival_quantile(n, k, w, 1.0).unwrap() - 1.0;
                let rel = (sim / exact - 1.0).abs();
                if rel > worst {
                    worst = rel;
                    at = (n, k, w);
                }
            }
        }
    }
    verdict(
        worst <= 0.01,
        format!("worst relative quantile gap {:.3}% at (n={}, k={}, w={})", 100.0 * worst, at.0, at.1, at.2),
    )
}

fn c9_gamma_solver() -> Verdict {
    let cfg = GammaSolveConfig::default();
    let mut pick = UniformStream::new(SEED, 9);
    let mut unique_fail = 0;
    for _ in 0..200 {
        let n = 5 + (pick.next_open01() * 96.0) as usize;
        let t2 = -(pick.next_open01() * 8.0 - 6.0).exp();
        let u2 = pick.next_open01();
        let root = match solve_theta1(t2, u2, n, &cfg) {
            Ok(x) => x,
            Err(_) => {
                unique_fail += 1;
                continue;
            }
        };
        // r(x) = F_x(t2) - u2 must be strictly decreasing through the root,
        // so it has no other zero on the bracket
        let grid: Vec<f64> = (0..=80).map(|i| root * (2.0f64).powf((i as f64 - 40.0) / 4.0)).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| approx_cdf_t2(x, t2, n, true).unwrap() - u2).collect();
        let monotone = vals.windows(2).all(|w| w[1] <= w[0]);
        let one_sign_change = vals.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count() == 1;
        if !(monotone && one_sign_change) {
            unique_fail += 1;
        }
    }
    let mc = GammaSolveConfig {
        method: SolveMethod::McBisection,
        mc_draws: 100_000,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut worst_by_n = Vec::new();
    for n in [20usize, 50] {
        let mut worst_n: f64 = 0.0;
        for shape in [0.5, 2.0, 10.0] {
            // t2 at which the MLE is `shape`
            let t2 = digamma(shape).unwrap() - shape.ln();
            for u2 in [0.1, 0.5, 0.9] {
                let a = solve_theta1(t2, u2, n, &cfg).unwrap();
                let b = solve_theta1(t2, u2, n, &mc).unwrap();
                worst_n = worst_n.max((a / b - 1.0).abs());
            }
        }
        worst = worst.max(worst_n);
        worst_by_n.push(format!("n={n}: {:.2}%", 100.0 * worst_n));
    }
    verdict(
        unique_fail == 0 && worst <= 0.05,
        format!(
            "{} of 200 triples failed existence/uniqueness; worst matched vs Monte Carlo root error {:.2}% ({})",
            unique_fail,
            100.0 * worst,
            worst_by_n.join(", ")
        ),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn c10_determinism() -> Verdict {
    let run = || {
        let mut bits: Vec<u64> = Vec::new();
        bits.push(soil_bound().to_bits());
        let mut pit = SimScenario::new(
            TrueModel::LogNormal { mu: 2.173, sigma2: 2.3808 },
            15,
            PredictionTarget::MeanOfM { m: 5 },
            AssertionKind::RightSided,
            0.05,
        );
        pit.replications = 300;
        pit.base_seed = SEED;
        let r = pit_study(&pit).unwrap();
        bits.extend(r.pit_samples.iter().map(|p| p.to_bits()));
        bits.push(r.ks_statistic.to_bits());
        let mut gamma = gamma_grid(AssertionKind::LeftSided, false, SEED, 500);
        gamma.truncate(2);
        for sc in gamma.iter_mut() {
            sc.replications = 100;
        }
        for c in grid_runner(&gamma).unwrap() {
            let r = c.report.unwrap();
            bits.push(r.coverage_estimate.to_bits());
            bits.extend(r.pit_samples.iter().map(|p| p.to_bits()));
        }
        let mut binom = binomial_grid(false, SEED, 500)[2];
        binom.replications = 100;
        bits.extend(coverage_study(&binom).unwrap().pit_samples.iter().map(|p| p.to_bits()));
        bits
    };
    let one = in_pool(1, run);
    let four = in_pool(4, run);
    let again = in_pool(4, run);
    verdict(
        one == four && four == again,
        format!("{} values compared across 1 and 4 worker threads and a repeat run", one.len()),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 11] = [
    ("1", "log-normal soil upper bound", c1_lognormal_soil),
    ("2", "gamma breakdown lower bound", c2_gamma_breakdowns),
    ("3", "binomial hearing-loss interval", c3_binomial_hearing),
    ("4", "normal closed-form equivalence", c4_normal_closed_form),
    ("5", "log-normal PIT uniformity", c5_pit_lognormal),
    ("6", "coverage grids", c6_coverage_grids),
    ("7", "binomial validity", c7_binomial_validity),
    ("8a", "Poisson quantile vs literal density quadrature", c8a_poisson_vs_literal_density),
    ("8b", "Poisson quantile vs ratio simulation", c8b_poisson_vs_simulation),
    ("9", "gamma solver properties", c9_gamma_solver),
    ("10", "determinism across worker counts", c10_determinism),
];

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in CRITERIA {
        let criterion = id.trim_end_matches(['a', 'b']);
        if !filters.is_empty() && !filters.iter().any(|x| x == id || x == criterion) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:<3} {} {name}: {} [{:.1?}]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
