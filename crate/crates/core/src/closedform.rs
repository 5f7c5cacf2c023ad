//! Analytical outage pipeline.
//!
//! The selected U-RIS link is the best of `NJ` i.i.d. exponential links
//! under outdated CSI; [`SelectedLinkDist`] carries its order-statistics cdf
//! and the resulting pdf/cdf of the instantaneous gain. [`outage_closed_form`]
//! evaluates the double alternating sum over `(s, s')` with one `K1` term per
//! pair, and [`outage_with_failures`] marginalizes it over the number of
//! failed elements.
//!
//! The double sum is not guaranteed to stay inside `[0, 1]`; results carry
//! the raw value and [`Diagnostic`]s instead of being silently clamped.

use std::fmt;

use thiserror::Error;

use crate::model::{RisBlockConfig, Scenario};
use crate::numeric::CompensatedSum;
use crate::specfun::{self, binomial, log_binomial, K1_UNDERFLOW_ARG};
use crate::upsilon::{BlockKernel, UpsilonValue};

/// Beyond this many candidate paths the alternating sums lose every digit.
pub const MAX_PATHS: usize = 60;

/// Raw values outside `[-RAW_SLACK, 1 + RAW_SLACK]` are flagged.
pub const RAW_SLACK: f64 = 0.01;

/// Cancellation loss (decimal digits) above which a result is flagged.
pub const MAX_LOST_DIGITS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("{0} candidate paths exceed the supported maximum of {MAX_PATHS}")]
    TooManyPaths(usize),
    #[error("number of paths must be at least 1")]
    NoPaths,
    #[error("rho = {0} outside [0, 1)")]
    Rho(f64),
    #[error("{field} = {value} must be positive and finite")]
    NonPositive { field: &'static str, value: f64 },
    #[error("Upsilon = {0} must be positive; an all-failed block has no closed form")]
    Upsilon(f64),
    #[error("failure count {q} exceeds block size {m_prime}")]
    FailureCount { q: usize, m_prime: usize },
    #[error("failure probability {0} outside [0, 1]")]
    FailProb(f64),
}

pub type Result<T> = std::result::Result<T, ClosedFormError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagnosticKind {
    /// Raw sum left `[-0.01, 1.01]`.
    RawOutOfRange(f64),
    /// `log10(max |term| / |result|)` exceeded the allowed digit loss.
    CancellationLoss(f64),
    /// Number of `K1` arguments past the underflow threshold.
    K1Underflow(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    /// Block position in [`Scenario::blocks`], when aggregated over blocks.
    pub block: Option<usize>,
    /// Failure count, when marginalized over failures.
    pub q: Option<usize>,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    pub fn is_ill_conditioned(&self) -> bool {
        !matches!(self.kind, DiagnosticKind::K1Underflow(_))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiagnosticKind::RawOutOfRange(v) => write!(f, "raw_out_of_range({v:.6e})")?,
            DiagnosticKind::CancellationLoss(d) => write!(f, "cancellation({d:.1}_digits)")?,
            DiagnosticKind::K1Underflow(n) => write!(f, "k1_underflow({n})")?,
        }
        if let Some(b) = self.block {
            write!(f, "@block{b}")?;
        }
        if let Some(q) = self.q {
            write!(f, "@q{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageResult {
    /// Clamped to `[0, 1]`.
    pub probability: f64,
    pub raw: f64,
    pub method: Method,
    pub ci_halfwidth: f64,
    /// Number of series terms (closed form) or trials (Monte Carlo).
    pub terms_used: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl OutageResult {
    pub fn is_ill_conditioned(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_ill_conditioned)
    }

    /// Diagnostics joined with `;`, empty when there are none.
    pub fn flags(&self) -> String {
        self.diagnostics
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }

    fn certain_outage() -> Self {
        Self {
            probability: 1.0,
            raw: 1.0,
            method: Method::ClosedForm,
            ci_halfwidth: 0.0,
            terms_used: 0,
            diagnostics: Vec::new(),
        }
    }
}

/// Distribution of the best of `n_paths` i.i.d. links under outdated CSI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedLinkDist {
    n_paths: usize,
    rho: f64,
    lambda: f64,
}

impl SelectedLinkDist {
    pub fn new(n_paths: usize, rho: f64, lambda: f64) -> Result<Self> {
        if n_paths == 0 {
            return Err(ClosedFormError::NoPaths);
        }
        if n_paths > MAX_PATHS {
            return Err(ClosedFormError::TooManyPaths(n_paths));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(ClosedFormError::Rho(rho));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ClosedFormError::NonPositive {
                field: "lambda",
                value: lambda,
            });
        }
        Ok(Self {
            n_paths,
            rho,
            lambda,
        })
    }

    /// U-side link of a scenario.
    pub fn user_side(scn: &Scenario) -> Result<Self> {
        let c = scn.config();
        Self::new(scn.n_paths(), c.rho1, c.lambda_u)
    }

    /// RIS-B side, with `rho2` and `lambda_B` in place of `rho1` and `lambda_U`.
    pub fn bs_side(scn: &Scenario) -> Result<Self> {
        let c = scn.config();
        Self::new(scn.n_paths(), c.rho2, c.lambda_b)
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// `(-1)^s C(NJ-1, s)` for `s = 0..NJ`.
    fn signed_binomials(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = (self.n_paths - 1) as u64;
        (0..=n).map(move |s| {
            let c = binomial(n, s).expect("s <= n");
            (s as f64, if s % 2 == 0 { c } else { -c })
        })
    }

    /// `s + s rho^2 + 1`.
    fn a(&self, s: f64) -> f64 {
        s + s * self.rho * self.rho + 1.0
    }

    /// Cdf of the best outdated gain: `NJ sum (-1)^s C/(s+1) (1 - e^{-(s+1)x/lambda})`.
    pub fn outdated_best_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let nj = self.n_paths as f64;
        let sum: CompensatedSum = self
            .signed_binomials()
            .map(|(s, c)| c / (s + 1.0) * -(-(s + 1.0) * x / self.lambda).exp_m1())
            .collect();
        nj * sum.value()
    }

    /// Derivative of [`Self::outdated_best_cdf`].
    pub fn outdated_best_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let nj = self.n_paths as f64;
        let sum: CompensatedSum = self
            .signed_binomials()
            .map(|(s, c)| c * (-(s + 1.0) * x / self.lambda).exp())
            .collect();
        nj / self.lambda * sum.value()
    }

    /// Pdf of the instantaneous gain of the selected link:
    /// `NJ/lambda sum (-1)^s C / A_s exp(-(lambda^2 + A_s) x / (A_s (1-rho^2) lambda))`.
    pub fn instantaneous_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let nj = self.n_paths as f64;
        let (lam, one_m) = (self.lambda, 1.0 - self.rho * self.rho);
        let sum: CompensatedSum = self
            .signed_binomials()
            .map(|(s, c)| {
                let a = self.a(s);
                c / a * (-(lam * lam + a) * x / (a * one_m * lam)).exp()
            })
            .collect();
        nj / lam * sum.value()
    }

    /// Integral of [`Self::instantaneous_pdf`] over `[0, x]`.
    pub fn instantaneous_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let nj = self.n_paths as f64;
        let (lam, one_m) = (self.lambda, 1.0 - self.rho * self.rho);
        let sum: CompensatedSum = self
            .signed_binomials()
            .map(|(s, c)| {
                let a = self.a(s);
                let rate = (lam * lam + a) / (a * one_m * lam);
                c / (lam * lam + a) * -(-rate * x).exp_m1()
            })
            .collect();
        nj * one_m * sum.value()
    }

    /// Limit of [`Self::instantaneous_cdf`] as `x -> inf`. Not 1 in general.
    pub fn instantaneous_mass(&self) -> f64 {
        let nj = self.n_paths as f64;
        let (lam, one_m) = (self.lambda, 1.0 - self.rho * self.rho);
        let sum: CompensatedSum = self
            .signed_binomials()
            .map(|(s, c)| c / (lam * lam + self.a(s)))
            .collect();
        nj * one_m * sum.value()
    }
}

/// Scalar inputs of the double sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    pub n_paths: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub lambda_u: f64,
    pub lambda_b: f64,
}

impl ClosedFormParams {
    pub fn from_scenario(scn: &Scenario) -> Self {
        let c = scn.config();
        Self {
            n_paths: scn.n_paths(),
            rho1: c.rho1,
            rho2: c.rho2,
            lambda_u: c.lambda_u,
            lambda_b: c.lambda_b,
        }
    }

    fn check(&self) -> Result<()> {
        SelectedLinkDist::new(self.n_paths, self.rho1, self.lambda_u)?;
        SelectedLinkDist::new(self.n_paths, self.rho2, self.lambda_b)?;
        Ok(())
    }

    /// Value of the outage expression with `z K1(z)` replaced by its `z -> 0`
    /// limit, i.e. the `gamma_T -> 0+` limit. Every bracket vanishes.
    pub fn zero_threshold_limit(&self) -> f64 {
        0.0
    }
}

/// Outage probability of a path with aggregate `upsilon` at the scenario's
/// `gamma_T`.
pub fn outage_closed_form(scn: &Scenario, upsilon: &UpsilonValue) -> Result<OutageResult> {
    outage_at(
        &ClosedFormParams::from_scenario(scn),
        scn.gamma_t(),
        upsilon.total,
    )
}

/// The double sum for explicit parameters.
pub fn outage_at(params: &ClosedFormParams, gamma_t: f64, upsilon: f64) -> Result<OutageResult> {
    params.check()?;
    if !(upsilon.is_finite() && upsilon > 0.0) {
        return Err(ClosedFormError::Upsilon(upsilon));
    }
    if !(gamma_t.is_finite() && gamma_t > 0.0) {
        return Err(ClosedFormError::NonPositive {
            field: "gamma_t",
            value: gamma_t,
        });
    }
    let ClosedFormParams {
        n_paths,
        rho1,
        rho2,
        lambda_u,
        lambda_b,
    } = *params;
    let nj = n_paths as f64;
    let (r1, r2) = (rho1 * rho1, rho2 * rho2);
    let prefactor = nj * nj * (1.0 - r1) / lambda_b;
    let n = (n_paths - 1) as u64;
    let coeffs: Vec<f64> = (0..=n)
        .map(|s| {
            let c = binomial(n, s).expect("s <= n");
            if s % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();

    let mut total = CompensatedSum::new();
    let mut largest: f64 = 0.0;
    let mut underflows = 0;
    for (s, cs) in coeffs.iter().enumerate() {
        let s = s as f64;
        let a = s + s * r1 + 1.0;
        let u = lambda_u * lambda_u + a;
        for (sp, csp) in coeffs.iter().enumerate() {
            let sp = sp as f64;
            let b = sp + sp * r2 + 1.0;
            let v = lambda_b * lambda_b + b;
            let weight = cs * csp / (u * b);
            let first = b * (1.0 - r2) * lambda_b / v;
            let z = (4.0 * u * v * gamma_t
                / (a * (1.0 - r1) * b * (1.0 - r2) * lambda_b * lambda_u * upsilon))
                .sqrt();
            if z > K1_UNDERFLOW_ARG {
                underflows += 1;
            }
            // first - sqrt(4 U B (1-rho2^2) lambda_B gamma / (V A (1-rho1^2) lambda_U Upsilon)) K1(z)
            // == first (1 - z K1(z)), evaluated without cancellation near z = 0.
            let bracket = first * specfun::one_minus_x_k1(z).expect("z > 0");
            let term = prefactor * weight * bracket;
            largest = largest.max(term.abs());
            total.add(term);
        }
    }
    let raw = total.value();
    let mut diagnostics = Vec::new();
    if !(-RAW_SLACK..=1.0 + RAW_SLACK).contains(&raw) {
        diagnostics.push(Diagnostic {
            block: None,
            q: None,
            kind: DiagnosticKind::RawOutOfRange(raw),
        });
    }
    if largest > 0.0 {
        let lost = if raw == 0.0 {
            f64::INFINITY
        } else {
            (largest / raw.abs()).log10()
        };
        if lost > MAX_LOST_DIGITS {
            diagnostics.push(Diagnostic {
                block: None,
                q: None,
                kind: DiagnosticKind::CancellationLoss(lost),
            });
        }
    }
    if underflows > 0 {
        diagnostics.push(Diagnostic {
            block: None,
            q: None,
            kind: DiagnosticKind::K1Underflow(underflows),
        });
    }
    Ok(OutageResult {
        probability: raw.clamp(0.0, 1.0),
        raw,
        method: Method::ClosedForm,
        ci_halfwidth: 0.0,
        terms_used: n_paths * n_paths,
        diagnostics,
    })
}

/// `P(Q = q) = C(M', q) p^q (1-p)^(M'-q)`, evaluated in log space.
pub fn failure_pmf(m_prime: usize, p: f64, q: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ClosedFormError::FailProb(p));
    }
    if q > m_prime {
        return Err(ClosedFormError::FailureCount { q, m_prime });
    }
    if p == 0.0 {
        return Ok(if q == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if q == m_prime { 1.0 } else { 0.0 });
    }
    let ln = log_binomial(m_prime as u64, q as u64).expect("q <= m_prime")
        + q as f64 * p.ln()
        + (m_prime - q) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// Outage of one block averaged over the number of failed elements, with
/// the first `q` elements taken as the failed ones. The all-failed case
/// contributes certain outage.
pub fn outage_with_failures(scn: &Scenario, block: &RisBlockConfig) -> Result<OutageResult> {
    let params = ClosedFormParams::from_scenario(scn);
    let kernel = BlockKernel::new(block);
    let m_prime = kernel.m_prime();
    let p = scn.config().fail_prob;
    let omega = scn.budget().omega;
    let active: Vec<usize> = (0..m_prime).collect();

    let mut raw = CompensatedSum::new();
    let mut clamped = CompensatedSum::new();
    let mut terms_used = 0;
    let mut diagnostics = Vec::new();
    for q in 0..=m_prime {
        let weight = failure_pmf(m_prime, p, q)?;
        if weight == 0.0 {
            continue;
        }
        let ups = kernel.upsilon(omega, &active[q..]);
        let part = if q == m_prime || ups.total <= 0.0 {
            OutageResult::certain_outage()
        } else {
            outage_at(&params, scn.gamma_t(), ups.total)?
        };
        raw.add(weight * part.raw);
        clamped.add(weight * part.probability);
        terms_used += part.terms_used;
        diagnostics.extend(
            part.diagnostics
                .into_iter()
                .map(|d| Diagnostic { q: Some(q), ..d }),
        );
    }
    Ok(OutageResult {
        probability: clamped.value().clamp(0.0, 1.0),
        raw: raw.value(),
        method: Method::ClosedForm,
        ci_halfwidth: 0.0,
        terms_used,
        diagnostics,
    })
}

/// Failure-marginalized closed form averaged over all blocks of the
/// scenario. Blocks differ only through their phases, hence their Upsilon.
pub fn scenario_outage(scn: &Scenario) -> Result<OutageResult> {
    let blocks = scn.blocks();
    let mut raw = CompensatedSum::new();
    let mut prob = CompensatedSum::new();
    let mut terms_used = 0;
    let mut diagnostics = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        let r = outage_with_failures(scn, block)?;
        raw.add(r.raw);
        prob.add(r.probability);
        terms_used += r.terms_used;
        diagnostics.extend(r.diagnostics.into_iter().map(|d| Diagnostic {
            block: Some(i),
            ..d
        }));
    }
    let n = blocks.len() as f64;
    Ok(OutageResult {
        probability: (prob.value() / n).clamp(0.0, 1.0),
        raw: raw.value() / n,
        method: Method::ClosedForm,
        ci_halfwidth: 0.0,
        terms_used,
        diagnostics,
    })
}
