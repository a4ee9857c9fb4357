//! Numerical statistics kernel.
//!
//! Distribution functions, least-squares regression and the hypothesis
//! tests behind fact significance. Everything is generic over [`Real`] so
//! the kernel runs in either single or double precision; the rest of the
//! crate uses the `f64` instantiation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid distribution parameter: {0}")]
    Domain(String),
    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

type Result<T> = std::result::Result<T, StatsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit<T = f64> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T = f64> {
    pub statistic: T,
    pub p_value: T,
}

impl<T: Real> TestResult<T> {
    fn new(statistic: T, p_value: T) -> Self {
        TestResult {
            statistic,
            p_value: clamp01(p_value),
        }
    }
}

fn clamp01<T: Real>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution<T = f64> {
    Normal { mean: T, sd: T },
    Logistic { location: T, scale: T },
    StudentT { df: T },
    ChiSquare { df: T },
}

impl<T: Real> Distribution<T> {
    fn check(&self) -> Result<()> {
        let bad = match *self {
            Distribution::Normal { sd, .. } => !(sd > T::zero()),
            Distribution::Logistic { scale, .. } => !(scale > T::zero()),
            Distribution::StudentT { df } | Distribution::ChiSquare { df } => !(df >= T::one()),
        };
        if bad {
            Err(StatsError::Domain(format!("{self:?}")))
        } else {
            Ok(())
        }
    }

    /// P(X <= x).
    pub fn cdf(&self, x: T) -> Result<T> {
        self.check()?;
        let half = T::lit(0.5);
        Ok(match *self {
            Distribution::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Distribution::Logistic { location, scale } => {
                T::one() / (T::one() + (-(x - location) / scale).exp())
            }
            Distribution::StudentT { df } => {
                if x == T::zero() {
                    half
                } else {
                    let tail = half * beta_inc(df * half, half, df / (df + x * x));
                    if x > T::zero() {
                        T::one() - tail
                    } else {
                        tail
                    }
                }
            }
            Distribution::ChiSquare { df } => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    gamma_p(df * half, x * half)
                }
            }
        })
    }

    /// P(X > x), computed without cancellation in the upper tail.
    pub fn sf(&self, x: T) -> Result<T> {
        self.check()?;
        let half = T::lit(0.5);
        Ok(match *self {
            Distribution::Normal { mean, sd } => normal_cdf(-(x - mean) / sd),
            Distribution::Logistic { location, scale } => {
                T::one() / (T::one() + ((x - location) / scale).exp())
            }
            Distribution::StudentT { .. } => self.cdf(-x)?,
            Distribution::ChiSquare { df } => {
                if x <= T::zero() {
                    T::one()
                } else {
                    gamma_q(df * half, x * half)
                }
            }
        })
    }
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn cdf<T: Real>(dist: Distribution<T>, x: T) -> Result<T> {
    dist.cdf(x)
}

/// Standard normal CDF.
pub fn normal_cdf<T: Real>(z: T) -> T {
    let x = -z / T::SQRT_2();
    T::lit(0.5) * erfc(x)
}

/// Complementary error function via the incomplete gamma function.
pub fn erfc<T: Real>(x: T) -> T {
    if x >= T::zero() {
        gamma_q(T::lit(0.5), x * x)
    } else {
        T::lit(2.0) - gamma_q(T::lit(0.5), x * x)
    }
}

/// Inverse of the standard normal CDF.
pub fn normal_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(StatsError::Domain(format!("quantile probability {p}")));
    }
    // Rational initial guess refined by one Halley step.
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let pf = p.to_f64().unwrap_or(0.5);
    let plow = 0.02425;
    let x = if pf < plow {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - plow {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = T::lit(x);
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * (T::TAU()).sqrt() * (x * x * T::lit(0.5)).exp();
        x = x - u / (T::one() + x * u * T::lit(0.5));
    }
    Ok(x)
}

/// Upper quantile of Student's t: the `t` with P(T > t) = `upper_tail`.
pub fn student_t_upper_quantile<T: Real>(df: T, upper_tail: T) -> Result<T> {
    let dist = Distribution::StudentT { df };
    dist.check()?;
    if !(upper_tail > T::zero() && upper_tail < T::one()) {
        return Err(StatsError::Domain(format!("tail probability {upper_tail}")));
    }
    let (mut lo, mut hi) = (-T::one(), T::one());
    while dist.sf(lo)? < upper_tail {
        lo = lo * T::lit(2.0);
    }
    while dist.sf(hi)? > upper_tail {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if dist.sf(mid)? > upper_tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::tolerance() * hi.abs().max(T::one()) {
            break;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < T::lit(0.5) {
        // Reflection.
        let pi = T::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(COEF[0]);
    let t = x + T::lit(7.5);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + a.ln()
}

const MAX_ITER: usize = 1000;

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut sum = T::one() / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::tolerance() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf<T: Real>(a: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = T::from_usize_lossy(i);
        let an = -i * (i - a);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::tolerance() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_inc<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        T::one() - front * beta_cf(b, a, T::one() - x) / b
    }
}

fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = T::from_usize_lossy(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < T::tolerance() {
            break;
        }
    }
    h
}

fn mean<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(x.len())
}

fn sum_sq_dev<T: Real>(x: &[T], m: T) -> T {
    x.iter().fold(T::zero(), |a, &v| a + (v - m) * (v - m))
}

fn min_len<T>(x: &[T], needed: usize) -> Result<()> {
    if x.len() < needed {
        Err(StatsError::InsufficientData {
            needed,
            got: x.len(),
        })
    } else {
        Ok(())
    }
}

/// Least-squares line through `y` against its index rescaled to [0, 1].
///
/// A constant series has slope 0 and r² = 0.
pub fn linear_regression<T: Real>(y: &[T]) -> Result<RegressionFit<T>> {
    min_len(y, 3)?;
    let n = y.len();
    let step = T::one() / T::from_usize_lossy(n - 1);
    let x: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) * step).collect();
    fit_line(&x, y)
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<RegressionFit<T>> {
    debug_assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let sxx = sum_sq_dev(x, mx);
    if sxx <= T::zero() {
        return Err(StatsError::DegenerateInput("x has zero variance".into()));
    }
    let sxy = x
        .iter()
        .zip(y)
        .fold(T::zero(), |a, (&xi, &yi)| a + (xi - mx) * (yi - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst = sum_sq_dev(y, my);
    let r_squared = if sst <= T::zero() {
        T::zero()
    } else {
        let sse = x.iter().zip(y).fold(T::zero(), |a, (&xi, &yi)| {
            let e = yi - (intercept + slope * xi);
            a + e * e
        });
        clamp01(T::one() - sse / sst)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Pearson correlation with a two-tailed t test on n − 2 degrees of freedom.
pub fn pearson_test<T: Real>(x: &[T], y: &[T]) -> Result<(T, TestResult<T>)> {
    if x.len() != y.len() {
        return Err(StatsError::DegenerateInput(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    min_len(x, 3)?;
    let mx = mean(x);
    let my = mean(y);
    let sxx = sum_sq_dev(x, mx);
    let syy = sum_sq_dev(y, my);
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }
    let sxy = x
        .iter()
        .zip(y)
        .fold(T::zero(), |a, (&xi, &yi)| a + (xi - mx) * (yi - my));
    let r = (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one());
    let df = T::from_usize_lossy(x.len() - 2);
    let one_minus = T::one() - r * r;
    if one_minus <= T::epsilon() * T::lit(16.0) {
        return Ok((r, TestResult::new(T::infinity(), T::zero())));
    }
    let t = r * (df / one_minus).sqrt();
    let p = T::lit(2.0) * Distribution::StudentT { df }.sf(t.abs())?;
    Ok((r, TestResult::new(t, p)))
}

/// Chi-square goodness of fit against equal counts per category.
pub fn chi_square_uniform<T: Real>(counts: &[T]) -> Result<TestResult<T>> {
    min_len(counts, 2)?;
    if counts.iter().any(|&c| c < T::zero()) {
        return Err(StatsError::DegenerateInput("negative count".into()));
    }
    let total = counts.iter().fold(T::zero(), |a, &c| a + c);
    if total <= T::zero() {
        return Err(StatsError::DegenerateInput("total count is zero".into()));
    }
    let k = T::from_usize_lossy(counts.len());
    let expected = total / k;
    let stat = counts
        .iter()
        .fold(T::zero(), |a, &o| a + (o - expected) * (o - expected) / expected);
    let p = Distribution::ChiSquare { df: k - T::one() }.sf(stat)?;
    Ok(TestResult::new(stat, p))
}

fn poly<T: Real>(coef: &[f64], x: T) -> T {
    coef.iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Shapiro–Wilk normality test using Royston's AS R94 approximation for
/// the coefficients and the p-value (3 ≤ n ≤ 5000).
pub fn shapiro_wilk<T: Real>(x: &[T]) -> Result<TestResult<T>> {
    let n = x.len();
    if !(3..=5000).contains(&n) {
        return Err(StatsError::DegenerateInput(format!(
            "Shapiro-Wilk needs 3..=5000 values, got {n}"
        )));
    }
    let mut xs = x.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let range = xs[n - 1] - xs[0];
    if !(range > T::zero()) {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let half = n / 2;
    let an = T::from_usize_lossy(n);
    // Coefficients a[0..half], positive, pairing the i-th smallest with the
    // i-th largest order statistic.
    let mut a = vec![T::zero(); half];
    if n == 3 {
        a[0] = T::lit(0.5).sqrt();
    } else {
        let an25 = an + T::lit(0.25);
        let m: Vec<T> = (1..=half)
            .map(|i| normal_quantile((T::from_usize_lossy(i) - T::lit(0.375)) / an25))
            .collect::<Result<_>>()?;
        let summ2 = m.iter().fold(T::zero(), |s, &v| s + v * v) * T::lit(2.0);
        let ssumm2 = summ2.sqrt();
        let rsn = T::one() / an.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let two = T::lit(2.0);
        let (first_free, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - two * m[0] * m[0] - two * m[1] * m[1])
                / (T::one() - two * a1 * a1 - two * a2 * a2))
                .sqrt();
            a[1] = a2;
            (2, fac)
        } else {
            let fac = ((summ2 - two * m[0] * m[0]) / (T::one() - two * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first_free..half {
            a[i] = -m[i] / fac;
        }
    }

    let mx = mean(&xs);
    let ssq = sum_sq_dev(&xs, mx);
    let b = (0..half).fold(T::zero(), |s, i| s + a[i] * (xs[n - 1 - i] - xs[i]));
    let w = (b * b / ssq).min(T::one());

    let p = if n == 3 {
        let pi6 = T::lit(6.0) / T::PI();
        let stqr = T::PI() / T::lit(3.0);
        (pi6 * (w.sqrt().asin() - stqr)).max(T::zero())
    } else {
        let w1 = (T::one() - w).ln();
        if n <= 11 {
            let gamma = poly(&G, an);
            if w1 >= gamma {
                T::zero()
            } else {
                let y = -(gamma - w1).ln();
                let m = poly(&C3, an);
                let s = poly(&C4, an).exp();
                normal_cdf(-(y - m) / s)
            }
        } else {
            let xx = an.ln();
            let m = poly(&C5, xx);
            let s = poly(&C6, xx).exp();
            normal_cdf(-(w1 - m) / s)
        }
    };
    Ok(TestResult::new(w, p))
}

/// Outcome of a two-sided Grubbs test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrubbsOutcome<T = f64> {
    /// Index (into the input) of the most extreme value when rejected.
    pub outlier: Option<usize>,
    /// The most extreme value's index whether or not it was rejected.
    pub candidate: usize,
    pub result: TestResult<T>,
}

pub const GRUBBS_ALPHA: f64 = 0.05;

/// Two-sided Grubbs critical value for sample size `n` at level `alpha`.
pub fn grubbs_critical_value<T: Real>(n: usize, alpha: T) -> Result<T> {
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    let nf = T::from_usize_lossy(n);
    let df = nf - T::lit(2.0);
    let t = student_t_upper_quantile(df, alpha / (T::lit(2.0) * nf))?;
    Ok((nf - T::one()) / nf.sqrt() * (t * t / (df + t * t)).sqrt())
}

/// Grubbs' test for a single outlier at α = 0.05.
///
/// The p-value maps G back through the same t relation used for the
/// critical value, Bonferroni-scaled by 2n and capped at 1.
pub fn grubbs_test<T: Real>(x: &[T]) -> Result<GrubbsOutcome<T>> {
    min_len(x, 3)?;
    let n = x.len();
    let m = mean(x);
    let ss = sum_sq_dev(x, m);
    if ss <= T::zero() {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }
    let nf = T::from_usize_lossy(n);
    let sd = (ss / (nf - T::one())).sqrt();
    let (candidate, dev) = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, (v - m).abs()))
        .fold((0, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
    let g = dev / sd;
    let df = nf - T::lit(2.0);
    let denom = (nf - T::one()) * (nf - T::one()) - nf * g * g;
    let p = if denom <= T::zero() {
        T::zero()
    } else {
        let t = (nf * df * g * g / denom).sqrt();
        (T::lit(2.0) * nf * Distribution::StudentT { df }.sf(t)?).min(T::one())
    };
    let outlier = (p < T::lit(GRUBBS_ALPHA)).then_some(candidate);
    Ok(GrubbsOutcome {
        outlier,
        candidate,
        result: TestResult::new(g, p),
    })
}

/// Exponent of the fixed power law used for long-tail fits.
pub const POWER_LAW_BETA: f64 = 0.7;

/// Tests whether the first (largest) value of a descending series stands
/// out from a power-law tail.
///
/// Values from the second onwards are regressed through the origin on
/// i^-0.7; a Gaussian fitted to those residuals scores the residual of the
/// first value, and the p-value is its upper-tail probability.
pub fn power_law_residual_test<T: Real>(sorted_desc: &[T]) -> Result<TestResult<T>> {
    min_len(sorted_desc, 4)?;
    if sorted_desc.iter().any(|&v| v < T::zero()) {
        return Err(StatsError::DegenerateInput("negative value".into()));
    }
    if sorted_desc.windows(2).any(|w| w[0] < w[1]) {
        return Err(StatsError::DegenerateInput("values not sorted descending".into()));
    }
    let beta = T::lit(POWER_LAW_BETA);
    let z: Vec<T> = (1..=sorted_desc.len())
        .map(|i| T::from_usize_lossy(i).powf(-beta))
        .collect();
    let (num, den) = z[1..]
        .iter()
        .zip(&sorted_desc[1..])
        .fold((T::zero(), T::zero()), |(n, d), (&zi, &xi)| {
            (n + zi * xi, d + zi * zi)
        });
    let coef = num / den;
    let residuals: Vec<T> = z[1..]
        .iter()
        .zip(&sorted_desc[1..])
        .map(|(&zi, &xi)| xi - coef * zi)
        .collect();
    let mu = mean(&residuals);
    let sd = (sum_sq_dev(&residuals, mu) / T::from_usize_lossy(residuals.len() - 1)).sqrt();
    let r = sorted_desc[0] - coef * z[0];
    let scale = sorted_desc[0].abs().max(T::one());
    let p = if sd <= T::tolerance() * scale {
        let d = r - mu;
        if d.abs() <= T::lit(1e-9) * scale {
            T::lit(0.5)
        } else if d > T::zero() {
            T::zero()
        } else {
            T::one()
        }
    } else {
        Distribution::Normal { mean: mu, sd }.sf(r)?
    };
    Ok(TestResult::new(r, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_points() {
        let n = Distribution::Normal {
            mean: 0.0,
            sd: 1.0,
        };
        assert_eq!(n.cdf(0.0).unwrap(), 0.5);
        for df in [1.0, 2.0, 7.0, 30.0] {
            assert_eq!(Distribution::StudentT { df }.cdf(0.0).unwrap(), 0.5);
        }
        let l = Distribution::Logistic {
            location: 1.0,
            scale: 2.0,
        };
        assert_eq!(l.cdf(1.0).unwrap(), 0.5);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(
            Distribution::Normal {
                mean: 0.0,
                sd: 0.0
            }
            .cdf(1.0),
            Err(StatsError::Domain(_))
        ));
        assert!(Distribution::StudentT { df: 0.5 }.cdf(1.0).is_err());
        assert!(Distribution::ChiSquare { df: 0.0 }.cdf(1.0).is_err());
        assert!(Distribution::Logistic {
            location: 0.0,
            scale: -1.0
        }
        .cdf(1.0)
        .is_err());
    }

    #[test]
    fn known_values() {
        // Φ(1.959963984540054) = 0.975
        assert_abs_diff_eq!(normal_cdf(1.959963984540054), 0.975, epsilon = 1e-14);
        assert_abs_diff_eq!(
            normal_quantile(0.975).unwrap(),
            1.959963984540054,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal_quantile(1e-10).unwrap(),
            -6.361340902404056,
            epsilon = 1e-9
        );
        // chi2(1) upper tail at 10 equals erfc(sqrt(5)).
        let sf = Distribution::ChiSquare { df: 1.0 }.sf(10.0).unwrap();
        assert_abs_diff_eq!(sf, 0.001565402258002549, epsilon = 1e-15);
        assert_abs_diff_eq!(ln_gamma(5.0), 24f64.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-13);
    }

    #[test]
    fn single_precision_instantiation() {
        let p: f32 = Distribution::StudentT { df: 10.0f32 }.cdf(1.812).unwrap();
        assert!((p - 0.95).abs() < 1e-3);
        let fit = linear_regression(&[1.0f32, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-5);
    }

    #[test]
    fn regression_exact_and_constant() {
        let fit = linear_regression(&[1.0, 3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(fit.slope, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);

        let flat = linear_regression(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r_squared, 0.0);

        assert_eq!(
            linear_regression(&[1.0, 2.0]).unwrap_err(),
            StatsError::InsufficientData { needed: 3, got: 2 }
        );
    }

    #[test]
    fn regression_matches_normal_equations() {
        // Solve [n Σx; Σx Σx²][b0 b1]ᵀ = [Σy Σxy]ᵀ directly.
        let y = [2.0, 1.0, 4.0, 3.0, 6.0];
        let x: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
        let n = 5.0;
        let sx: f64 = x.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let b1 = (n * sxy - sx * sy) / det;
        let b0 = (sxx * sy - sx * sxy) / det;
        let fit = linear_regression(&y).unwrap();
        assert_abs_diff_eq!(fit.slope, b1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, b0, epsilon = 1e-12);
        // Frozen: slope 4.0, intercept 1.2, r² = SSR/SST = 10/14.8.
        assert_abs_diff_eq!(fit.slope, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 10.0 / 14.8, epsilon = 1e-12);
    }

    #[test]
    fn pearson_cases() {
        let (r, t) = pearson_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(t.p_value, 0.0);
        let x = [1.0, 2.0, 3.0, 4.0];
        let (r, t) = pearson_test(&x, &x).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(t.p_value, 0.0);
        // y is a permutation of x with zero correlation.
        let (r, t) = pearson_test(&x, &[2.0, 4.0, 1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.p_value, 1.0, epsilon = 1e-12);
        assert!(matches!(
            pearson_test(&x, &[1.0, 1.0, 1.0, 1.0]),
            Err(StatsError::DegenerateInput(_))
        ));
    }

    #[test]
    fn chi_square_cases() {
        let t = chi_square_uniform(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        let t = chi_square_uniform(&[10.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t.statistic, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.p_value, 0.001565402258002549, epsilon = 1e-14);
        assert!(chi_square_uniform(&[7.0]).is_err());
        assert!(chi_square_uniform(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn grubbs_cases() {
        let g = grubbs_test(&[8.0, 9.0, 10.0, 9.0, 50.0]).unwrap();
        assert_eq!(g.outlier, Some(4));
        assert!(g.result.p_value < 0.05);
        // G = 32.8 / sqrt(336.7)
        assert_abs_diff_eq!(g.result.statistic, 32.8 / 336.7f64.sqrt(), epsilon = 1e-12);
        let crit = grubbs_critical_value(5, 0.05).unwrap();
        assert!(g.result.statistic > crit);

        let g = grubbs_test(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(g.outlier, None);
        assert!(g.result.statistic < crit);

        assert!(matches!(
            grubbs_test(&[3.0, 3.0, 3.0]),
            Err(StatsError::DegenerateInput(_))
        ));
    }

    #[test]
    fn grubbs_critical_value_table() {
        // Published two-sided α = 0.05 critical values.
        for (n, g) in [(5, 1.715), (10, 2.290), (20, 2.709)] {
            assert_abs_diff_eq!(grubbs_critical_value(n, 0.05).unwrap(), g, epsilon = 1e-3);
        }
    }

    #[test]
    fn power_law_cases() {
        let exact: Vec<f64> = (1..=6).map(|i| 50.0 * (i as f64).powf(-0.7)).collect();
        let t = power_law_residual_test(&exact).unwrap();
        assert_abs_diff_eq!(t.statistic, 0.0, epsilon = 1e-9);
        assert_eq!(t.p_value, 0.5);

        let t = power_law_residual_test(&[100.0, 5.0, 4.0, 3.5, 3.0]).unwrap();
        assert!(t.p_value < 0.01, "{t:?}");

        assert!(matches!(
            power_law_residual_test(&[3.0, 2.0, 1.0]),
            Err(StatsError::InsufficientData { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn shapiro_wilk_errors() {
        assert!(shapiro_wilk(&[1.0, 1.0, 1.0]).is_err());
        assert!(shapiro_wilk(&[1.0, 2.0]).is_err());
    }
}
