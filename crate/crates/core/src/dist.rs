//! Distribution primitives used by the associations: CDFs, quantiles and the
//! binomial/beta identity.

use crate::error::{Error, Result};
use crate::rng::UniformStream;
use crate::special::{self, beta_inc_xy, gamma_inc, invert_cdf, ln_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Above this many degrees of freedom the t quantile uses a Cornish–Fisher
/// expansion around the normal quantile (error below 1e-14).
const T_NORMAL_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum DistSpec {
    StdNormal,
    StudentT { df: f64 },
    Chi { df: f64 },
    Gamma { shape: f64, scale: f64 },
    Beta { a: f64, b: f64 },
    Binomial { n: u64, theta: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::StdNormal => Ok(()),
            DistSpec::StudentT { df } | DistSpec::Chi { df } => positive("df", df),
            DistSpec::Gamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            DistSpec::Beta { a, b } => {
                positive("a", a)?;
                positive("b", b)
            }
            DistSpec::Binomial { n, theta } => {
                if n < 1 {
                    return Err(Error::domain("binomial n must be >= 1"));
                }
                if !(0.0..=1.0).contains(&theta) {
                    return Err(Error::domain(format!("binomial theta must be in [0,1], got {theta}")));
                }
                Ok(())
            }
            DistSpec::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::domain("lognormal mu must be finite"));
                }
                positive("sigma", sigma)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, DistSpec::Binomial { .. })
    }

    /// `(F(x), 1 − F(x))`, each accurate in its own tail.
    pub fn cdf_pair(&self, x: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::domain("cdf argument is NaN"));
        }
        match *self {
            DistSpec::StdNormal => Ok(special::std_normal_cdf_pair(x)),
            DistSpec::StudentT { df } => Ok(student_t_cdf_pair(df, x)?),
            DistSpec::Chi { df } => {
                if x <= 0.0 {
                    Ok((0.0, 1.0))
                } else {
                    gamma_inc(0.5 * df, 0.5 * x * x)
                }
            }
            DistSpec::Gamma { shape, scale } => {
                if x <= 0.0 {
                    Ok((0.0, 1.0))
                } else {
                    gamma_inc(shape, x / scale)
                }
            }
            DistSpec::Beta { a, b } => {
                if x <= 0.0 {
                    Ok((0.0, 1.0))
                } else if x >= 1.0 {
                    Ok((1.0, 0.0))
                } else {
                    beta_inc_xy(a, b, x, 1.0 - x)
                }
            }
            DistSpec::Binomial { n, theta } => binomial_cdf_pair(n, theta, x.floor()),
            DistSpec::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    Ok((0.0, 1.0))
                } else {
                    Ok(special::std_normal_cdf_pair((x.ln() - mu) / sigma))
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_pair(x)?.0)
    }

    /// Density (probability mass for the binomial).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistSpec::StdNormal => special::std_normal_pdf(x),
            DistSpec::StudentT { df } => student_t_pdf(df, x),
            DistSpec::Chi { df } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ((1.0 - 0.5 * df) * 2f64.ln() + (df - 1.0) * x.ln() - 0.5 * x * x - ln_gamma(0.5 * df)).exp()
                }
            }
            DistSpec::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = x / scale;
                    ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp() / scale
                }
            }
            DistSpec::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - special::ln_beta(a, b)).exp()
                }
            }
            DistSpec::Binomial { n, theta } => {
                if x < 0.0 || x > n as f64 || x.fract() != 0.0 {
                    0.0
                } else {
                    binomial_pmf(n, theta, x as u64)
                }
            }
            DistSpec::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::std_normal_pdf((x.ln() - mu) / sigma) / (x * sigma)
                }
            }
        })
    }

    /// Generalized inverse `min{x : F(x) ≥ p}` for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Probability(p));
        }
        match *self {
            DistSpec::StdNormal => special::std_normal_quantile(p),
            DistSpec::StudentT { df } => student_t_quantile(df, p),
            DistSpec::Chi { df } => Ok((2.0 * special::gamma_quantile(0.5 * df, p)?).sqrt()),
            DistSpec::Gamma { shape, scale } => Ok(scale * special::gamma_quantile(shape, p)?),
            DistSpec::Beta { a, b } => special::beta_quantile(a, b, p),
            DistSpec::Binomial { n, theta } => Ok(binomial_quantile(n, theta, p)? as f64),
            DistSpec::LogNormal { mu, sigma } => Ok((mu + sigma * special::std_normal_quantile(p)?).exp()),
        }
    }

    /// One draw by inversion of a uniform from `stream`.
    pub fn sample(&self, stream: &mut UniformStream) -> Result<f64> {
        self.quantile(stream.next_open01())
    }
}

fn student_t_pdf(df: f64, t: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln();
    (ln_norm - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
}

fn student_t_cdf_pair(df: f64, t: f64) -> Result<(f64, f64)> {
    if t.is_infinite() {
        return Ok(if t > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) });
    }
    let t2 = t * t;
    // tail = ½ I_{df/(df+t²)}(df/2, ½)
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    let (i, _) = beta_inc_xy(0.5 * df, 0.5, x, y)?;
    let tail = 0.5 * i;
    Ok(if t < 0.0 { (tail, 1.0 - tail) } else { (1.0 - tail, tail) })
}

fn student_t_quantile(df: f64, p: f64) -> Result<f64> {
    let z = special::std_normal_quantile(p)?;
    if df == 1.0 {
        return Ok((PI * (p - 0.5)).tan());
    }
    let z2 = z * z;
    let cf = z + (z2 * z + z) / (4.0 * df) + (5.0 * z2 * z2 * z + 16.0 * z2 * z + 3.0 * z) / (96.0 * df * df);
    if df > T_NORMAL_LIMIT {
        return Ok(cf);
    }
    if df == 2.0 {
        return Ok((2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt());
    }
    let cdf = |t: f64| student_t_cdf_pair(df, t);
    let pdf = |t: f64| student_t_pdf(df, t);
    let guess = if cf.is_finite() { cf } else { z };
    let mut lo = guess.min(0.0) - 1.0;
    let mut hi = guess.max(0.0) + 1.0;
    while cdf(lo)?.0 > p {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::Numeric(format!("t quantile bracket failed for p = {p}")));
        }
    }
    while cdf(hi)?.0 < p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric(format!("t quantile bracket failed for p = {p}")));
        }
    }
    invert_cdf(cdf, pdf, p, lo, hi, guess)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub(crate) fn binomial_pmf(n: u64, theta: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if theta == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if theta == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * theta.ln() + (n - k) as f64 * (-theta).ln_1p()).exp()
}

/// Binomial CDF pair via the beta identity `F_{n,θ}(k) = I_{1−θ}(n−k, k+1)`.
fn binomial_cdf_pair(n: u64, theta: f64, k: f64) -> Result<(f64, f64)> {
    if k < 0.0 {
        return Ok((0.0, 1.0));
    }
    if k >= n as f64 {
        return Ok((1.0, 0.0));
    }
    if theta == 0.0 {
        return Ok((1.0, 0.0));
    }
    if theta == 1.0 {
        return Ok((0.0, 1.0));
    }
    let k = k as u64;
    beta_inc_xy((n - k) as f64, k as f64 + 1.0, 1.0 - theta, theta)
}

/// `min{k : F_{n,θ}(k) ≥ p}`.
pub fn binomial_quantile(n: u64, theta: f64, p: f64) -> Result<u64> {
    DistSpec::Binomial { n, theta }.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    if theta == 0.0 {
        return Ok(0);
    }
    if theta == 1.0 {
        return Ok(n);
    }
    // CDF values within a few ulps of p count as reaching it
    let p = p * (1.0 - 64.0 * f64::EPSILON);
    let nf = n as f64;
    let mean = nf * theta;
    let sd = (mean * (1.0 - theta)).sqrt();
    let z = special::std_normal_quantile(p)?;
    let guess = (mean + sd * z + (z * z - 1.0) * (1.0 - 2.0 * theta) / 6.0 - 0.5).ceil();
    let mut k = guess.clamp(0.0, nf) as u64;
    let ratio = theta / (1.0 - theta);
    let (mut f, _) = binomial_cdf_pair(n, theta, k as f64)?;
    let mut pmf = binomial_pmf(n, theta, k);
    if f >= p {
        // walk down while the previous value still reaches p
        while k > 0 {
            let f_prev = f - pmf;
            if f_prev < p {
                break;
            }
            pmf *= k as f64 / ((n - k + 1) as f64 * ratio);
            k -= 1;
            f = f_prev;
            if pmf == 0.0 {
                // lost the mass in underflow; restart from an exact evaluation
                f = binomial_cdf_pair(n, theta, k as f64)?.0;
                pmf = binomial_pmf(n, theta, k);
            }
        }
    } else {
        while f < p && k < n {
            pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
            k += 1;
            f += pmf;
            if pmf == 0.0 {
                f = binomial_cdf_pair(n, theta, k as f64)?.0;
                pmf = binomial_pmf(n, theta, k);
            }
        }
    }
    // the running sum drifts over long walks; settle against exact values
    while k < n && binomial_cdf_pair(n, theta, k as f64)?.0 < p {
        k += 1;
    }
    while k > 0 && binomial_cdf_pair(n, theta, (k - 1) as f64)?.0 >= p {
        k -= 1;
    }
    Ok(k)
}

/// Returns `(F_{n,θ}(y), 1 − G_{y+1,n−y}(θ))`: the binomial CDF by direct
/// summation of the mass function, and the same quantity through the
/// regularized incomplete beta function.
pub fn binomial_beta_identity_check(n: u64, theta: f64, y: u64) -> Result<(f64, f64)> {
    DistSpec::Binomial { n, theta }.validate()?;
    if y > n {
        return Err(Error::domain(format!("y = {y} exceeds n = {n}")));
    }
    let direct: f64 = (0..=y).map(|k| binomial_pmf(n, theta, k)).sum::<f64>().min(1.0);
    let via_beta = if y == n || theta == 0.0 {
        1.0
    } else if theta == 1.0 {
        0.0
    } else {
        beta_inc_xy(y as f64 + 1.0, (n - y) as f64, theta, 1.0 - theta)?.1
    };
    Ok((direct, via_beta))
}
