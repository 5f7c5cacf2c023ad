//! Scalar special functions used by the closed-form evaluator.
//!
//! Only what the outage expression needs is provided: `I0`, `K1` (plus the
//! companions `I1`, `K0` used for cross-checks), and log-space binomials.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest argument for which unscaled `I0` is returned.
pub const I0_MAX_ARG: f64 = 700.0;

/// Above this argument `K1` is below `1e-304` and may flush to zero.
pub const K1_UNDERFLOW_ARG: f64 = 700.0;

/// Series/asymptotic crossover for `I0`. The asymptotic expansion's smallest
/// term is about `exp(-2x)`, so it reaches full precision only past ~20.
const I0_SERIES_LIMIT: f64 = 30.0;

/// Series/continued-fraction crossover for `K1`.
const K_SERIES_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {arg} outside the domain of {func}")]
    Domain { func: &'static str, arg: f64 },
    #[error("{func}({arg}) overflows f64; use the exponentially scaled variant")]
    Overflow { func: &'static str, arg: f64 },
    #[error("binomial coefficient C({n}, {k}) undefined: k > n")]
    BinomialDomain { n: u64, k: u64 },
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Option<Self> {
        (value.is_finite() && value > 0.0).then_some(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// Returns [`SpecFunError::Overflow`] for `x > 700` instead of a silent
/// infinity; [`bessel_i0e`] covers the whole half-line.
pub fn bessel_i0(x: f64) -> Result<f64> {
    check_nonneg("bessel_i0", x)?;
    if x > I0_MAX_ARG {
        return Err(SpecFunError::Overflow {
            func: "bessel_i0",
            arg: x,
        });
    }
    if x <= I0_SERIES_LIMIT {
        Ok(i0_series(x))
    } else {
        Ok(i0e_asymptotic(x) * x.exp())
    }
}

/// Exponentially scaled `I0`: `exp(-x) * I0(x)`.
pub fn bessel_i0e(x: f64) -> Result<f64> {
    check_nonneg("bessel_i0e", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= I0_SERIES_LIMIT {
        Ok(i0_series(x) * (-x).exp())
    } else {
        Ok(i0e_asymptotic(x))
    }
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check_nonneg("bessel_i1", x)?;
    if x > I0_MAX_ARG {
        return Err(SpecFunError::Overflow {
            func: "bessel_i1",
            arg: x,
        });
    }
    if x <= I0_SERIES_LIMIT {
        Ok(i1_series(x))
    } else {
        Ok(i1e_asymptotic(x) * x.exp())
    }
}

/// Modified Bessel function of the second kind, order one.
///
/// Values for `x > 700` are below `1e-304` and are allowed to underflow;
/// callers that care can test the argument against [`K1_UNDERFLOW_ARG`].
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_pos("bessel_k1", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= K_SERIES_LIMIT {
        Ok(k01_series(x).1)
    } else {
        let (_, k1e) = k01e_steed(x);
        Ok(k1e * (-x).exp())
    }
}

/// Exponentially scaled `K1`: `exp(x) * K1(x)`.
pub fn bessel_k1e(x: f64) -> Result<f64> {
    check_pos("bessel_k1e", x)?;
    if x <= K_SERIES_LIMIT {
        Ok(k01_series(x).1 * x.exp())
    } else {
        Ok(k01e_steed(x).1)
    }
}

/// Modified Bessel function of the second kind, order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_pos("bessel_k0", x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x <= K_SERIES_LIMIT {
        Ok(k01_series(x).0)
    } else {
        let (k0e, _) = k01e_steed(x);
        Ok(k0e * (-x).exp())
    }
}

/// `1 - x K1(x)` without the cancellation of the naive form near zero.
///
/// Tends to `0` as `x -> 0+` and to `1` as `x -> inf`.
pub fn one_minus_x_k1(x: f64) -> Result<f64> {
    check_pos("one_minus_x_k1", x)?;
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x <= K_SERIES_LIMIT {
        // x K1(x) = 1 + x ln(x/2) I1(x) - (x^2/4) sum_k [psi(k+1)+psi(k+2)] (x^2/4)^k / (k!(k+1)!)
        let y = 0.25 * x * x;
        Ok(-x * (0.5 * x).ln() * i1_series(x) + y * psi_sum_k1(y))
    } else {
        Ok(1.0 - x * k01e_steed(x).1 * (-x).exp())
    }
}

/// Natural log of `n!`.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        // Every n! with n <= 20 is exactly representable (its odd part is < 2^53).
        (2..=n).map(|i| i as f64).product::<f64>().ln()
    } else {
        let nf = n as f64;
        nf * nf.ln() - nf + 0.5 * (2.0 * PI * nf).ln() + stirling_tail(nf)
    }
}

/// `ln C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(SpecFunError::BinomialDomain { n, k });
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k <= 30 {
        // Short products keep full relative accuracy when the result is small.
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    // Stirling form with the leading terms combined analytically so that
    // nothing of size n ln n is ever subtracted.
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    let frac = kf / nf;
    let entropy = -kf * frac.ln() - rest * (-frac).ln_1p();
    let prefactor = 0.5 * (nf / (2.0 * PI * kf * rest)).ln();
    let tail = stirling_err(n) - stirling_err(k) - stirling_err(n - k);
    Ok(entropy + prefactor + tail)
}

/// `C(n, k)` as a float, exact while the value fits in 53 bits.
pub fn binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(SpecFunError::BinomialDomain { n, k });
    }
    let k = k.min(n - k);
    if n <= 120 {
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        return Ok(c as f64);
    }
    Ok(log_binomial(n, k)?.exp())
}

fn check_nonneg(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(SpecFunError::Domain { func, arg: x })
    } else {
        Ok(())
    }
}

fn check_pos(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        Err(SpecFunError::Domain { func, arg: x })
    } else {
        Ok(())
    }
}

fn i0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= y / (k * k);
        sum += term;
        if term < f64::EPSILON * 0.25 * sum {
            return sum;
        }
        k += 1.0;
    }
}

fn i1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= y / (k * (k + 1.0));
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Hankel expansion of `exp(-x) I_nu(x)` with `mu = 4 nu^2`.
fn i_asymptotic_scaled(x: f64, mu: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}

fn i0e_asymptotic(x: f64) -> f64 {
    i_asymptotic_scaled(x, 0.0)
}

fn i1e_asymptotic(x: f64) -> f64 {
    i_asymptotic_scaled(x, 4.0)
}

/// `sum_k [psi(k+1) + psi(k+2)] y^k / (k! (k+1)!)`, the regular part of `K1`.
fn psi_sum_k1(y: f64) -> f64 {
    // psi(1) + psi(2) = 1 - 2 gamma
    let mut harmonic = 0.0;
    let mut coeff = 1.0;
    let mut sum = 1.0 - 2.0 * EULER_GAMMA;
    let mut k = 1.0;
    loop {
        // psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        harmonic += 1.0 / k;
        coeff *= y / (k * (k + 1.0));
        let term = coeff * (2.0 * harmonic + 1.0 / (k + 1.0) - 2.0 * EULER_GAMMA);
        sum += term;
        if term.abs() < f64::EPSILON * 0.25 * sum.abs() {
            return sum;
        }
        k += 1.0;
    }
}

/// Power series for `(K0, K1)`; accurate for `0 < x <= 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k y^k / (k!)^2
    let mut coeff = 1.0;
    let mut harmonic = 0.0;
    let mut k0_tail = 0.0;
    let mut k = 1.0;
    loop {
        harmonic += 1.0 / k;
        coeff *= y / (k * k);
        let term = coeff * harmonic;
        k0_tail += term;
        if term < f64::EPSILON * 0.25 * k0_tail {
            break;
        }
        k += 1.0;
    }
    let k0 = -(log_half + EULER_GAMMA) * i0_series(x) + k0_tail;

    let k1 = 1.0 / x + log_half * i1_series(x) - 0.5 * x * 0.5 * psi_sum_k1(y);
    (k0, k1)
}

/// Steed's continued fraction (Temme's CF2) for `exp(x) K0(x)` and
/// `exp(x) K1(x)`; converges quickly for `x >= 2`.
fn k01e_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    h *= a1;
    let k0e = (FRAC_PI_2 / x).sqrt() / s;
    let k1e = k0e * (x + 0.5 - h) / x;
    (k0e, k1e)
}

/// `ln n! - (n ln n - n + ln(2 pi n)/2)`.
fn stirling_err(n: u64) -> f64 {
    if n <= 20 {
        let nf = n as f64;
        log_factorial(n) - (nf * nf.ln() - nf + 0.5 * (2.0 * PI * nf).ln())
    } else {
        stirling_tail(n as f64)
    }
}

fn stirling_tail(n: f64) -> f64 {
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
}
