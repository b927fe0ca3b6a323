//! Special functions: log-gamma, digamma/trigamma, regularized incomplete
//! gamma and beta functions, and a safeguarded Newton inverter shared by the
//! quantile functions.
//!
//! Incomplete gamma/beta use the series / continued-fraction split with
//! modified Lentz evaluation and return both the lower and upper regularized
//! values, each computed without subtractive cancellation.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + sum.ln()
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {x}")))
    }
}

// Asymptotic tails for x >= 10, each free of the large leading term.
fn digamma_minus_ln_asym(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32_760.0 - r / 12.0))))));
    -0.5 / x - series
}

fn trigamma_minus_inv_asym(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 6.0
            - r * (1.0 / 30.0
                - r * (1.0 / 42.0
                    - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2_730.0 - r * 7.0 / 6.0))))));
    0.5 * r + series / x
}

const ASYM_FROM: f64 = 10.0;

/// ψ(x) − ln x, evaluated without cancellation for large `x`.
pub fn digamma_minus_ln(x: f64) -> Result<f64> {
    check_positive("digamma argument", x)?;
    if x >= ASYM_FROM {
        return Ok(digamma_minus_ln_asym(x));
    }
    let shift = (ASYM_FROM - x).ceil();
    let z = x + shift;
    let mut acc = 0.0;
    let mut k = 0.0;
    while k < shift {
        acc += 1.0 / (x + k);
        k += 1.0;
    }
    Ok(digamma_minus_ln_asym(z) + (z / x).ln() - acc)
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    Ok(digamma_minus_ln(x)? + x.ln())
}

/// ψ'(x) − 1/x, which is strictly positive for every x > 0.
pub fn trigamma_minus_inv(x: f64) -> Result<f64> {
    check_positive("trigamma argument", x)?;
    if x >= ASYM_FROM {
        return Ok(trigamma_minus_inv_asym(x));
    }
    let shift = (ASYM_FROM - x).ceil();
    let z = x + shift;
    let mut acc = 0.0;
    let mut k = 0.0;
    while k < shift {
        acc += 1.0 / ((x + k) * (x + k));
        k += 1.0;
    }
    // ψ'(x) = ψ'(z) + Σ 1/(x+k)²  and  1/z − 1/x = −shift/(x z)
    Ok(trigamma_minus_inv_asym(z) + acc - shift / (x * z))
}

/// Trigamma function ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    Ok(trigamma_minus_inv(x)? + 1.0 / x)
}

/// Regularized incomplete gamma functions `(P(a, x), Q(a, x))`.
pub fn gamma_inc(a: f64, x: f64) -> Result<(f64, f64)> {
    check_positive("gamma shape", a)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = gamma_series(a, x, ln_pre)?;
        Ok((p, 1.0 - p))
    } else {
        let q = gamma_cf(a, x, ln_pre)?;
        Ok((1.0 - q, q))
    }
}

fn gamma_series(a: f64, x: f64, ln_pre: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            return Ok((sum * ln_pre.exp()).min(1.0));
        }
    }
    Err(Error::Numeric(format!("incomplete gamma series failed (a={a}, x={x})")))
}

fn gamma_cf(a: f64, x: f64, ln_pre: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok((ln_pre.exp() * h).min(1.0));
        }
    }
    Err(Error::Numeric(format!("incomplete gamma continued fraction failed (a={a}, x={x})")))
}

/// Regularized incomplete beta functions `(I_x(a, b), 1 − I_x(a, b))`.
///
/// `y` must equal `1 − x`; passing it separately lets callers supply a
/// complement that was computed without rounding (e.g. `θ` when `x = 1 − θ`).
pub fn beta_inc_xy(a: f64, b: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    check_positive("beta parameter a", a)?;
    check_positive("beta parameter b", b)?;
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::domain(format!("incomplete beta argument must be in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if y == 0.0 {
        return Ok((1.0, 0.0));
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let i = (ln_front.exp() * beta_cf(a, b, x, y)? / a).min(1.0);
        Ok((i, 1.0 - i))
    } else {
        let j = (ln_front.exp() * beta_cf(b, a, y, x)? / b).min(1.0);
        Ok((1.0 - j, j))
    }
}

/// Regularized incomplete beta `I_x(a, b)` and its complement.
pub fn beta_inc(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    beta_inc_xy(a, b, x, 1.0 - x)
}

fn beta_cf(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    // 1 − qab·x/qap, written to keep y exact when x is near 1
    let mut d = 1.0 - qab * x / qap;
    if x > 0.5 {
        d = (qap - qab + qab * y) / qap;
    }
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!("incomplete beta continued fraction failed (a={a}, b={b}, x={x})")))
}

/// Standard normal CDF as the pair `(Φ(z), 1 − Φ(z))`.
pub fn std_normal_cdf_pair(z: f64) -> (f64, f64) {
    if z.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if z.is_infinite() {
        return if z > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    // erfc(|z|/√2) = Q(1/2, z²/2)
    let (p, q) = gamma_inc(0.5, 0.5 * z * z).expect("valid incomplete gamma arguments");
    let tail = 0.5 * q;
    let body = 0.5 + 0.5 * p;
    if z < 0.0 {
        (tail, body)
    } else {
        (body, tail)
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    std_normal_cdf_pair(z).0
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - HALF_LN_2PI).exp()
}

// Acklam's rational approximation, refined below by Halley steps.
const ACK_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACK_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACK_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACK_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((ACK_C[0] * q + ACK_C[1]) * q + ACK_C[2]) * q + ACK_C[3]) * q + ACK_C[4]) * q + ACK_C[5])
            / ((((ACK_D[0] * q + ACK_D[1]) * q + ACK_D[2]) * q + ACK_D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((ACK_A[0] * r + ACK_A[1]) * r + ACK_A[2]) * r + ACK_A[3]) * r + ACK_A[4]) * r + ACK_A[5])
            * q
            / (((((ACK_B[0] * r + ACK_B[1]) * r + ACK_B[2]) * r + ACK_B[3]) * r + ACK_B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// Standard normal quantile for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    if p > 0.5 {
        // 1 − p is exact here
        return Ok(-std_normal_quantile(1.0 - p)?);
    }
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = std_normal_cdf_pair(x).0 - p;
        let u = e / std_normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

/// Inverts a continuous, strictly increasing CDF.
///
/// `cdf` returns `(F(x), 1 − F(x))`. The upper-tail value is used when `p >
/// 0.5` so both tails keep full relative precision. `lo`/`hi` must bracket
/// the root (`F(lo) ≤ p ≤ F(hi)`); Newton steps that leave the bracket fall
/// back to bisection, geometric when the bracket spans orders of magnitude.
pub(crate) fn invert_cdf<C, D>(cdf: C, pdf: D, p: f64, mut lo: f64, mut hi: f64, x0: f64) -> Result<f64>
where
    C: Fn(f64) -> Result<(f64, f64)>,
    D: Fn(f64) -> f64,
{
    let upper = p > 0.5;
    let q = 1.0 - p;
    let g = |x: f64| -> Result<f64> {
        let (f, s) = cdf(x)?;
        Ok(if upper { q - s } else { f - p })
    };
    let mut x = if x0 > lo && x0 < hi { x0 } else { midpoint(lo, hi) };
    for _ in 0..400 {
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = pdf(x);
        let newton = x - gx / dens;
        let next = if dens > 0.0 && dens.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            midpoint(lo, hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(x);
        }
    }
    Err(Error::Numeric(format!("quantile inversion did not converge for p = {p}")))
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi / lo > 4.0 {
        (lo.ln() * 0.5 + hi.ln() * 0.5).exp()
    } else if hi < 0.0 && lo / hi > 4.0 {
        -((-lo).ln() * 0.5 + (-hi).ln() * 0.5).exp()
    } else {
        0.5 * (lo + hi)
    }
}

/// Quantile of Gamma(shape, 1).
pub fn gamma_quantile(shape: f64, p: f64) -> Result<f64> {
    check_positive("gamma shape", shape)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    let a = shape;
    let ln_ga = ln_gamma(a);
    let guess = if a > 1.0 {
        let pp = if p < 0.5 { p } else { 1.0 - p };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if p < 0.5 {
            z = -z;
        }
        (a * (1.0 - 1.0 / (9.0 * a) - z / (3.0 * a.sqrt())).powi(3)).max(1e-3)
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if p < t {
            (p / t).powf(1.0 / a)
        } else {
            1.0 - (1.0 - (p - t) / (1.0 - t)).ln()
        }
    };
    let cdf = |x: f64| gamma_inc(a, x);
    let pdf = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            ((a - 1.0) * x.ln() - x - ln_ga).exp()
        }
    };
    let guess = if guess.is_finite() && guess > 0.0 { guess } else { a };
    let (lo, hi) = bracket_positive(&cdf, p, guess)?;
    invert_cdf(cdf, pdf, p, lo, hi, guess)
}

// Finds 0 < lo < hi with F(lo) <= p <= F(hi) by geometric expansion.
fn bracket_positive<C>(cdf: &C, p: f64, guess: f64) -> Result<(f64, f64)>
where
    C: Fn(f64) -> Result<(f64, f64)>,
{
    let mut lo = guess;
    let mut hi = guess;
    for _ in 0..2000 {
        if cdf(lo)?.0 <= p {
            break;
        }
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Ok((0.0, hi));
        }
    }
    for _ in 0..2000 {
        if cdf(hi)?.0 >= p {
            return Ok((lo, hi));
        }
        hi *= 2.0;
    }
    Err(Error::Numeric(format!("could not bracket quantile for p = {p}")))
}

/// Quantile of Beta(a, b).
pub fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    check_positive("beta parameter a", a)?;
    check_positive("beta parameter b", b)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    let guess = if a >= 1.0 && b >= 1.0 {
        let pp = if p < 0.5 { p } else { 1.0 - p };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if p < 0.5 {
            z = -z;
        }
        let al = (z * z - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = z * (al + h).sqrt() / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if p < t / w {
            (a * w * p).powf(1.0 / a)
        } else {
            1.0 - (b * w * (1.0 - p)).powf(1.0 / b)
        }
    };
    let ln_b = ln_beta(a, b);
    let cdf = |x: f64| beta_inc(a, b, x);
    let pdf = |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp()
        }
    };
    let guess = if guess.is_finite() && guess > 0.0 && guess < 1.0 {
        guess
    } else {
        a / (a + b)
    };
    invert_cdf(cdf, pdf, p, 0.0, 1.0, guess)
}
