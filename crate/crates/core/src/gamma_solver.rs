//! Solving the conditional gamma association for `(θ1, θ2)`.
//!
//! With sufficient statistics `T1 = Σ y_i` and `T2 = mean(ln y) − ln(T1/n)`
//! the association reads `T1 = θ2 Γ⁻¹_{nθ1}(U1)` and `T2 = F⁻¹_{θ1}(U2)`.
//! `F_{θ1}`, the law of `T2` under shape `θ1`, has no closed form. It is
//! evaluated here either by Monte Carlo or by a two-moment approximation
//! with mean `ψ(x) − ln x` and variance `(ψ'(x) − 1/x)/n`, matched to a
//! normal or to a gamma law on `−T2`. Because `F_x(t2)` is strictly
//! decreasing in `x`, `θ1` is the unique root of `F_x(t2) = u2`.

use crate::error::{Error, Result};
use crate::rng::UniformStream;
use crate::special::{digamma_minus_ln, gamma_inc, gamma_quantile, std_normal_cdf, trigamma_minus_inv};
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Monte Carlo estimate of `F_x(t2)` with common random numbers.
    McBisection,
    NormalApprox,
    GammaMatchedApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSolveConfig {
    pub method: SolveMethod,
    /// Hard limits for the bracket search on `θ1`.
    pub bracket: (f64, f64),
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Simulated `T2` values per CDF evaluation (Monte Carlo method only).
    pub mc_draws: usize,
    pub mc_seed: u64,
}

impl Default for GammaSolveConfig {
    fn default() -> Self {
        GammaSolveConfig {
            method: SolveMethod::GammaMatchedApprox,
            bracket: (1e-10, 1e10),
            rel_tol: 1e-8,
            max_iter: 200,
            mc_draws: 100_000,
            mc_seed: 0x5EED,
        }
    }
}

impl GammaSolveConfig {
    pub fn with_method(method: SolveMethod) -> Self {
        GammaSolveConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bracket;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::domain(format!("invalid bracket ({lo}, {hi})")));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::domain("rel_tol must be positive"));
        }
        if self.method == SolveMethod::McBisection && self.mc_draws == 0 {
            return Err(Error::domain("mc_draws must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSolution {
    pub theta1: f64,
    pub theta2: f64,
    pub iterations: usize,
    pub method_used: SolveMethod,
}

/// Sufficient statistics `(T1, T2)` of a positive sample.
pub fn gamma_sufficient_stats(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Data("gamma model needs at least two observations".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Data(format!("gamma data must be strictly positive, found {v}")));
    }
    let n = values.len() as f64;
    let t1: f64 = values.iter().sum();
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let t2 = mean_log - (t1 / n).ln();
    if t2.is_nan() || t2 >= 0.0 {
        return Err(Error::Data("degenerate gamma sample: all observations are equal".into()));
    }
    Ok((t1, t2))
}

fn check_t2(t2: f64) -> Result<()> {
    if t2.is_finite() && t2 < 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("t2 must be negative and finite, got {t2}")))
    }
}

/// Root of `ψ(x) − ln x = t2`: the maximum likelihood estimate of the shape.
pub fn mle_shape(t2: f64) -> Result<f64> {
    check_t2(t2)?;
    let s = -t2;
    // Closed-form starting point, accurate to a few percent.
    let mut x = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let h = digamma_minus_ln(x)? - t2;
        let dh = x * trigamma_minus_inv(x)?;
        // Newton in ln x, damped to at most a factor e per step.
        let step = (h / dh).clamp(-1.0, 1.0);
        x *= (-step).exp();
        if step.abs() < 1e-14 {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        reason: "MLE Newton iteration".into(),
        t2,
        u2: f64::NAN,
    })
}

/// Two-moment approximation of `F_x(t2) = P(T2 ≤ t2)` for samples of size `n`.
///
/// `matched = false` uses the normal law with the large-sample moments
/// `ψ(x) − ln x` and `(ψ'(x) − 1/x)/n`, so it is exactly 1/2 at the MLE.
/// `matched = true` puts a gamma law on `−T2` with the exact finite-`n`
/// moments. `T2 − ln n` is the mean log of a symmetric Dirichlet(x) vector,
/// giving mean `ψ(x) − ψ(nx) + ln n` and variance `ψ'(x)/n − ψ'(nx)`.
pub fn approx_cdf_t2(x: f64, t2: f64, n: usize, matched: bool) -> Result<f64> {
    check_t2(t2)?;
    if n < 2 {
        return Err(Error::domain("n must be at least 2"));
    }
    let nf = n as f64;
    let (mean, var) = if matched {
        (
            digamma_minus_ln(x)? - digamma_minus_ln(nf * x)?,
            trigamma_minus_inv(x)? / nf - trigamma_minus_inv(nf * x)?,
        )
    } else {
        (digamma_minus_ln(x)?, trigamma_minus_inv(x)? / nf)
    };
    if !(var > 0.0 && var.is_finite() && mean < 0.0) {
        return Err(Error::Numeric(format!("T2 moments underflowed at x = {x}")));
    }
    if matched {
        let shape = mean * mean / var;
        let scale = var / -mean;
        Ok(gamma_inc(shape, -t2 / scale)?.1)
    } else {
        Ok(std_normal_cdf((t2 - mean) / var.sqrt()))
    }
}

/// Monte Carlo estimate of `F_x(t2)` from `draws` simulated samples of size
/// `n` from Gamma(x, 1). The stream is fixed by `seed`, so repeated calls
/// with different `x` share random numbers.
pub fn mc_cdf_t2(x: f64, t2: f64, n: usize, draws: usize, seed: u64) -> Result<f64> {
    check_t2(t2)?;
    let gamma = Gamma::new(x, 1.0).map_err(|e| Error::domain(format!("gamma shape {x}: {e}")))?;
    let mut stream = UniformStream::new(seed, 0x7132);
    let nf = n as f64;
    let mut hits = 0usize;
    for _ in 0..draws {
        let mut sum = 0.0;
        let mut sum_log = 0.0;
        for _ in 0..n {
            let y: f64 = gamma.sample(&mut stream);
            sum += y;
            sum_log += y.ln();
        }
        let stat = sum_log / nf - (sum / nf).ln();
        if stat <= t2 {
            hits += 1;
        }
    }
    Ok(hits as f64 / draws as f64)
}

fn cdf_t2(x: f64, t2: f64, n: usize, cfg: &GammaSolveConfig) -> Result<f64> {
    match cfg.method {
        SolveMethod::McBisection => mc_cdf_t2(x, t2, n, cfg.mc_draws, cfg.mc_seed),
        SolveMethod::NormalApprox => approx_cdf_t2(x, t2, n, false),
        SolveMethod::GammaMatchedApprox => approx_cdf_t2(x, t2, n, true),
    }
}

/// `θ1` solving `F_{θ1}(t2) = u2`, with the number of CDF evaluations used.
pub fn solve_theta1_counted(t2: f64, u2: f64, n: usize, cfg: &GammaSolveConfig) -> Result<(f64, usize)> {
    check_t2(t2)?;
    if !(u2 > 0.0 && u2 < 1.0) {
        return Err(Error::Probability(u2));
    }
    if n < 2 {
        return Err(Error::domain("n must be at least 2"));
    }
    cfg.validate()?;
    let fail = |reason: String| Error::NonConvergence { reason, t2, u2 };
    let (min_x, max_x) = cfg.bracket;
    let anchor = mle_shape(t2)?.clamp(min_x, max_x);
    let r = |x: f64| -> Result<f64> { Ok(cdf_t2(x, t2, n, cfg)? - u2) };

    let mut evals = 0usize;
    // r is decreasing: need r(lo) > 0 > r(hi).
    let mut lo = anchor;
    let mut hi = anchor;
    loop {
        evals += 1;
        let v = r(lo)?;
        if v > 0.0 {
            break;
        }
        if v == 0.0 {
            return Ok((lo, evals));
        }
        hi = lo;
        if lo <= min_x {
            return Err(fail(format!("bracket expansion reached the lower limit {min_x}")));
        }
        lo = (lo * 0.5).max(min_x);
    }
    if hi == lo {
        loop {
            hi = (hi * 2.0).min(max_x);
            evals += 1;
            let v = r(hi)?;
            if v < 0.0 {
                break;
            }
            if v == 0.0 {
                return Ok((hi, evals));
            }
            lo = hi;
            if hi >= max_x {
                return Err(fail(format!("bracket expansion reached the upper limit {max_x}")));
            }
        }
    }
    for _ in 0..cfg.max_iter {
        if hi / lo - 1.0 <= cfg.rel_tol {
            return Ok(((lo * hi).sqrt(), evals));
        }
        let mid = (lo * hi).sqrt();
        evals += 1;
        let v = r(mid)?;
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            return Ok((mid, evals));
        }
    }
    Err(fail(format!("bisection exceeded {} iterations", cfg.max_iter)))
}

pub fn solve_theta1(t2: f64, u2: f64, n: usize, cfg: &GammaSolveConfig) -> Result<f64> {
    solve_theta1_counted(t2, u2, n, cfg).map(|(x, _)| x)
}

/// `θ2 = t1 / Γ⁻¹_{nθ1}(u1)`.
pub fn solve_theta2(t1: f64, theta1: f64, u1: f64, n: usize) -> Result<f64> {
    if !(t1 > 0.0 && theta1 > 0.0 && n >= 1) {
        return Err(Error::domain(format!("t1 = {t1}, theta1 = {theta1}, n = {n} must all be positive")));
    }
    if !(u1 > 0.0 && u1 < 1.0) {
        return Err(Error::Probability(u1));
    }
    let q = gamma_quantile(n as f64 * theta1, u1)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Numeric(format!("gamma quantile underflow (shape {}, u1 {u1})", n as f64 * theta1)));
    }
    let theta2 = t1 / q;
    if !theta2.is_finite() {
        return Err(Error::Numeric(format!("theta2 overflow (t1 {t1}, quantile {q})")));
    }
    Ok(theta2)
}

/// Full solve of `(θ1, θ2)` for one auxiliary draw `(u1, u2)`.
pub fn solve(t1: f64, t2: f64, u1: f64, u2: f64, n: usize, cfg: &GammaSolveConfig) -> Result<GammaSolution> {
    let (theta1, iterations) = solve_theta1_counted(t2, u2, n, cfg)?;
    let theta2 = solve_theta2(t1, theta1, u1, n)?;
    Ok(GammaSolution {
        theta1,
        theta2,
        iterations,
        method_used: cfg.method,
    })
}
