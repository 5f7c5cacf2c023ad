//! Scenario data model: RIS population, geometry, link budget, correlation,
//! failure probability and outage threshold.
//!
//! Scenarios are read from a flat `key = value` text format (`#` starts a
//! comment). [`ScenarioConfig`] is the unvalidated form; [`Scenario`] is built
//! from it by [`Scenario::validate`] and carries the derived quantities
//! (`M'`, `gamma_T`, `Omega`) and the per-block configurations.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rng::{derive_seed, PHASE_DOMAIN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{field} must be a positive integer, got {value}")]
    NonPositiveCount { field: &'static str, value: usize },
    #[error(
        "elements_per_ris ({m}) is not divisible by blocks_per_ris ({j}); {m} mod {j} = {rem}"
    )]
    BlocksDoNotDivide { m: usize, j: usize, rem: usize },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("{field} must be > 0, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} = {value} outside [0, 1): rho = 1 makes 1 - rho^2 vanish")]
    RhoOutOfDomain { field: &'static str, value: f64 },
    #[error("obstacle_coeff = {0} outside (0, 1]")]
    ObstacleOutOfRange(f64),
    #[error("fail_prob = {0} outside [0, 1]")]
    FailProbOutOfRange(f64),
    #[error("exactly one of target_rate and gamma_t must be given (got both)")]
    ThresholdConflict,
    #[error("exactly one of target_rate and gamma_t must be given (got neither)")]
    ThresholdMissing,
    #[error("correlation_param = {value} invalid for {kind} correlation")]
    CorrelationParam { kind: &'static str, value: f64 },
    #[error("block ({k}, {j}): {reason}")]
    Block { k: usize, j: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}`: cannot parse {value:?}")]
    InvalidValue { field: String, value: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("reading scenario file: {0}")]
    Io(#[from] std::io::Error),
}

/// Structure of the element correlation matrix `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationKind {
    Identity,
    /// All off-diagonal entries equal `a`.
    Uniform(f64),
    /// `a_{l,s} = exp(-c |l - s|)`.
    ExponentialDecay(f64),
}

impl CorrelationKind {
    fn name(&self) -> &'static str {
        match self {
            CorrelationKind::Identity => "identity",
            CorrelationKind::Uniform(_) => "uniform",
            CorrelationKind::ExponentialDecay(_) => "exponential",
        }
    }

    fn param(&self) -> f64 {
        match *self {
            CorrelationKind::Identity => 0.0,
            CorrelationKind::Uniform(a) => a,
            CorrelationKind::ExponentialDecay(c) => c,
        }
    }

    fn from_parts(kind: &str, param: f64) -> Option<Self> {
        match kind {
            "identity" => Some(CorrelationKind::Identity),
            "uniform" => Some(CorrelationKind::Uniform(param)),
            "exponential" => Some(CorrelationKind::ExponentialDecay(param)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Psi, theta, Phi i.i.d. uniform on `[0, 2pi)`.
    Random,
    /// theta = 0 and Psi_m = Phi_m, so every term of the block sum is in phase.
    Aligned,
}

impl FromStr for PhaseMode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "random" => Ok(PhaseMode::Random),
            "aligned" => Ok(PhaseMode::Aligned),
            _ => Err(()),
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseMode::Random => "random",
            PhaseMode::Aligned => "aligned",
        })
    }
}

/// Outage threshold, given either as a target rate or directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    TargetRate(f64),
    GammaT(f64),
}

impl Threshold {
    pub fn gamma_t(self) -> f64 {
        match self {
            Threshold::TargetRate(r) => gamma_from_rate(r),
            Threshold::GammaT(g) => g,
        }
    }
}

/// `gamma_T = 2^(2r) - 1`.
pub fn gamma_from_rate(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

/// Unvalidated scenario, one field per config key.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_ris: usize,
    pub blocks_per_ris: usize,
    pub elements_per_ris: usize,
    pub tx_power_db: f64,
    pub noise_power_db: f64,
    pub obstacle_coeff: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub lambda_u: f64,
    pub lambda_b: f64,
    pub fail_prob: f64,
    pub target_rate: Option<f64>,
    pub gamma_t: Option<f64>,
    pub dist_user_m: f64,
    pub dist_bs_m: f64,
    pub pathloss_exp: f64,
    pub correlation: CorrelationKind,
    pub phase_mode: PhaseMode,
    pub seed: u64,
}

/// Every key accepted in a scenario file.
pub const SCENARIO_KEYS: &[&str] = &[
    "n_ris",
    "blocks_per_ris",
    "elements_per_ris",
    "tx_power_db",
    "noise_power_db",
    "obstacle_coeff",
    "rho1",
    "rho2",
    "lambda_u",
    "lambda_b",
    "fail_prob",
    "target_rate",
    "gamma_t",
    "dist_user_m",
    "dist_bs_m",
    "pathloss_exp",
    "correlation_kind",
    "correlation_param",
    "phase_mode",
    "seed",
];

impl ScenarioConfig {
    /// Parses the `key = value` format. Unknown keys, duplicate keys and
    /// lines without `=` are parse errors.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let pairs = parse_pairs(text)?;
        if pairs.is_empty() {
            return Err(ScenarioError::Parse {
                line: 0,
                message: "no scenario fields found".into(),
            });
        }
        for (line, key, _) in &pairs {
            if !SCENARIO_KEYS.contains(&key.as_str()) {
                return Err(ScenarioError::Parse {
                    line: *line,
                    message: format!("unknown key `{key}`"),
                });
            }
        }
        Self::from_pairs(pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str())))
    }

    /// Builds a config from already-split key/value pairs. Later pairs
    /// override earlier ones.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, ScenarioError> {
        let mut fields = FieldSet::default();
        for (k, v) in pairs {
            fields.set(k, v);
        }
        fields.build()
    }

    /// Applies `key = value` overrides on top of this config.
    pub fn with_overrides<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, ScenarioError> {
        let text = self.to_config_string();
        let mut fields = FieldSet::default();
        for (_, k, v) in parse_pairs(&text)? {
            fields.set(&k, &v);
        }
        for (k, v) in pairs {
            if !SCENARIO_KEYS.contains(&k) {
                return Err(ScenarioError::InvalidValue {
                    field: k.to_string(),
                    value: v.to_string(),
                });
            }
            if k == "target_rate" {
                fields.remove("gamma_t");
            } else if k == "gamma_t" {
                fields.remove("target_rate");
            }
            fields.set(k, v);
        }
        fields.build()
    }

    /// Renders the config in the file format; parsing the output yields an
    /// identical config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("n_ris", self.n_ris.to_string());
        put("blocks_per_ris", self.blocks_per_ris.to_string());
        put("elements_per_ris", self.elements_per_ris.to_string());
        put("tx_power_db", fmt_f64(self.tx_power_db));
        put("noise_power_db", fmt_f64(self.noise_power_db));
        put("obstacle_coeff", fmt_f64(self.obstacle_coeff));
        put("rho1", fmt_f64(self.rho1));
        put("rho2", fmt_f64(self.rho2));
        put("lambda_u", fmt_f64(self.lambda_u));
        put("lambda_b", fmt_f64(self.lambda_b));
        put("fail_prob", fmt_f64(self.fail_prob));
        if let Some(r) = self.target_rate {
            put("target_rate", fmt_f64(r));
        }
        if let Some(g) = self.gamma_t {
            put("gamma_t", fmt_f64(g));
        }
        put("dist_user_m", fmt_f64(self.dist_user_m));
        put("dist_bs_m", fmt_f64(self.dist_bs_m));
        put("pathloss_exp", fmt_f64(self.pathloss_exp));
        put("correlation_kind", self.correlation.name().to_string());
        put("correlation_param", fmt_f64(self.correlation.param()));
        put("phase_mode", self.phase_mode.to_string());
        put("seed", self.seed.to_string());
        out
    }
}

/// `{:?}` on f64 is the shortest representation that round-trips.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Splits `key = value` lines, dropping comments and blank lines.
pub(crate) fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ScenarioError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got {line:?}"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("empty key or value in {line:?}"),
            });
        }
        if out.iter().any(|(_, seen, _)| seen == k) {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("duplicate key `{k}`"),
            });
        }
        out.push((line_no, k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[derive(Default)]
struct FieldSet(Vec<(String, String)>);

impl FieldSet {
    fn set(&mut self, k: &str, v: &str) {
        self.remove(k);
        self.0.push((k.to_string(), v.to_string()));
    }

    fn remove(&mut self, k: &str) {
        self.0.retain(|(key, _)| key != k);
    }

    fn raw(&self, k: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, k: &'static str) -> Result<Option<T>, ScenarioError> {
        match self.raw(k) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ScenarioError::InvalidValue {
                    field: k.to_string(),
                    value: v.to_string(),
                }),
        }
    }

    fn req<T: FromStr>(&self, k: &'static str) -> Result<T, ScenarioError> {
        self.get(k)?.ok_or(ScenarioError::MissingField(k))
    }

    fn build(&self) -> Result<ScenarioConfig, ScenarioError> {
        let kind = self.raw("correlation_kind").unwrap_or("identity");
        let param = self.get::<f64>("correlation_param")?.unwrap_or(0.0);
        let correlation = CorrelationKind::from_parts(kind, param).ok_or_else(|| {
            ScenarioError::InvalidValue {
                field: "correlation_kind".into(),
                value: kind.to_string(),
            }
        })?;
        Ok(ScenarioConfig {
            n_ris: self.req("n_ris")?,
            blocks_per_ris: self.req("blocks_per_ris")?,
            elements_per_ris: self.req("elements_per_ris")?,
            tx_power_db: self.req("tx_power_db")?,
            noise_power_db: self.req("noise_power_db")?,
            obstacle_coeff: self.get("obstacle_coeff")?.unwrap_or(1.0),
            rho1: self.req("rho1")?,
            rho2: self.req("rho2")?,
            lambda_u: self.req("lambda_u")?,
            lambda_b: self.req("lambda_b")?,
            fail_prob: self.req("fail_prob")?,
            target_rate: self.get("target_rate")?,
            gamma_t: self.get("gamma_t")?,
            dist_user_m: self.req("dist_user_m")?,
            dist_bs_m: self.req("dist_bs_m")?,
            pathloss_exp: self.req("pathloss_exp")?,
            correlation,
            phase_mode: self.get("phase_mode")?.unwrap_or(PhaseMode::Random),
            seed: self.get("seed")?.unwrap_or(0),
        })
    }
}

/// Symmetric `M' x M'` element correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    /// Checks symmetry, unit diagonal and entries in `[0, 1]`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err("correlation matrix is not square".into());
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Self { dim, data };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), String> {
        for l in 0..self.dim {
            if self.get(l, l) != 1.0 {
                return Err(format!("diagonal entry ({l}, {l}) is not 1"));
            }
            for s in 0..self.dim {
                let a = self.get(l, s);
                if !(0.0..=1.0).contains(&a) {
                    return Err(format!("entry ({l}, {s}) = {a} outside [0, 1]"));
                }
                if a != self.get(s, l) {
                    return Err(format!("matrix not symmetric at ({l}, {s})"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize) -> f64 {
        self.data[l * self.dim + s]
    }
}

/// Builds the correlation matrix of one block.
pub fn make_correlation(
    kind: CorrelationKind,
    m_prime: usize,
) -> Result<CorrelationMatrix, ValidationError> {
    let entry: Box<dyn Fn(usize, usize) -> f64> = match kind {
        CorrelationKind::Identity => Box::new(|l, s| if l == s { 1.0 } else { 0.0 }),
        CorrelationKind::Uniform(a) => {
            if !(0.0..=1.0).contains(&a) {
                return Err(ValidationError::CorrelationParam {
                    kind: "uniform",
                    value: a,
                });
            }
            Box::new(move |l, s| if l == s { 1.0 } else { a })
        }
        CorrelationKind::ExponentialDecay(c) => {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(ValidationError::CorrelationParam {
                    kind: "exponential",
                    value: c,
                });
            }
            Box::new(move |l, s| (-c * l.abs_diff(s) as f64).exp())
        }
    };
    let data = (0..m_prime)
        .flat_map(|l| (0..m_prime).map(move |s| (l, s)))
        .map(|(l, s)| entry(l, s))
        .collect();
    Ok(CorrelationMatrix { dim: m_prime, data })
}

/// One sub-surface block `R_{k,j}`. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct RisBlockConfig {
    pub ris_index: usize,
    pub block_index: usize,
    pub correlation: CorrelationMatrix,
    /// Adjustable phases Psi_m.
    pub phases_psi: Vec<f64>,
    /// U-RIS channel phases theta^e.
    pub phases_theta: Vec<f64>,
    /// RIS-B channel phases Phi^e.
    pub phases_phi: Vec<f64>,
    pub dist_user_m: f64,
    pub dist_bs_m: f64,
    pub pathloss_exp: f64,
}

impl RisBlockConfig {
    pub fn m_prime(&self) -> usize {
        self.correlation.dim()
    }

    /// Checks the block invariants.
    pub fn check(&self) -> Result<(), ValidationError> {
        let fail = |reason: String| ValidationError::Block {
            k: self.ris_index,
            j: self.block_index,
            reason,
        };
        let m = self.m_prime();
        if m == 0 {
            return Err(fail("block has no elements".into()));
        }
        self.correlation.check().map_err(fail)?;
        for (name, v) in [
            ("phases_psi", &self.phases_psi),
            ("phases_theta", &self.phases_theta),
            ("phases_phi", &self.phases_phi),
        ] {
            if v.len() != m {
                return Err(fail(format!(
                    "{name} has {} entries, expected {m}",
                    v.len()
                )));
            }
            if v.iter().any(|p| !p.is_finite()) {
                return Err(fail(format!("{name} contains a non-finite phase")));
            }
        }
        for (name, d) in [
            ("dist_user_m", self.dist_user_m),
            ("dist_bs_m", self.dist_bs_m),
            ("pathloss_exp", self.pathloss_exp),
        ] {
            if !(d.is_finite() && d > 0.0) {
                return Err(fail(format!("{name} = {d} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Path-loss factor `(d_U d_B)^(-delta)`.
    pub fn distance_factor(&self) -> f64 {
        (self.dist_user_m * self.dist_bs_m).powf(-self.pathloss_exp)
    }
}

/// `Omega = P nu / N0` in linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBudget {
    pub omega: f64,
}

impl LinearBudget {
    pub fn from_db(tx_power_db: f64, noise_power_db: f64, obstacle_coeff: f64) -> Self {
        let snr_db = tx_power_db - noise_power_db;
        // Integral dB values stay exact (10^2 == 100.0) through powi.
        let linear = if snr_db.fract() == 0.0 && snr_db % 10.0 == 0.0 {
            10f64.powi((snr_db / 10.0) as i32)
        } else {
            10f64.powf(snr_db / 10.0)
        };
        Self {
            omega: linear * obstacle_coeff,
        }
    }
}

/// A validated scenario. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    config: ScenarioConfig,
    m_prime: usize,
    gamma_t: f64,
    budget: LinearBudget,
    blocks: Vec<RisBlockConfig>,
}

impl Scenario {
    /// Checks every invariant and populates the derived fields and blocks.
    pub fn validate(config: ScenarioConfig) -> Result<Self, ValidationError> {
        let c = &config;
        for (field, value) in [
            ("n_ris", c.n_ris),
            ("blocks_per_ris", c.blocks_per_ris),
            ("elements_per_ris", c.elements_per_ris),
        ] {
            if value == 0 {
                return Err(ValidationError::NonPositiveCount { field, value });
            }
        }
        let rem = c.elements_per_ris % c.blocks_per_ris;
        if rem != 0 {
            return Err(ValidationError::BlocksDoNotDivide {
                m: c.elements_per_ris,
                j: c.blocks_per_ris,
                rem,
            });
        }
        for (field, value) in [
            ("tx_power_db", c.tx_power_db),
            ("noise_power_db", c.noise_power_db),
            ("obstacle_coeff", c.obstacle_coeff),
            ("rho1", c.rho1),
            ("rho2", c.rho2),
            ("lambda_u", c.lambda_u),
            ("lambda_b", c.lambda_b),
            ("fail_prob", c.fail_prob),
            ("dist_user_m", c.dist_user_m),
            ("dist_bs_m", c.dist_bs_m),
            ("pathloss_exp", c.pathloss_exp),
        ] {
            if !value.is_finite() {
                return Err(ValidationError::NonFinite { field, value });
            }
        }
        if !(c.obstacle_coeff > 0.0 && c.obstacle_coeff <= 1.0) {
            return Err(ValidationError::ObstacleOutOfRange(c.obstacle_coeff));
        }
        for (field, value) in [("rho1", c.rho1), ("rho2", c.rho2)] {
            if !(0.0..1.0).contains(&value) {
                return Err(ValidationError::RhoOutOfDomain { field, value });
            }
        }
        for (field, value) in [
            ("lambda_u", c.lambda_u),
            ("lambda_b", c.lambda_b),
            ("dist_user_m", c.dist_user_m),
            ("dist_bs_m", c.dist_bs_m),
            ("pathloss_exp", c.pathloss_exp),
        ] {
            if value <= 0.0 {
                return Err(ValidationError::NonPositive { field, value });
            }
        }
        if !(0.0..=1.0).contains(&c.fail_prob) {
            return Err(ValidationError::FailProbOutOfRange(c.fail_prob));
        }
        let threshold = match (c.target_rate, c.gamma_t) {
            (Some(_), Some(_)) => return Err(ValidationError::ThresholdConflict),
            (None, None) => return Err(ValidationError::ThresholdMissing),
            (Some(r), None) => ("target_rate", Threshold::TargetRate(r), r),
            (None, Some(g)) => ("gamma_t", Threshold::GammaT(g), g),
        };
        let (field, threshold, value) = threshold;
        if !value.is_finite() {
            return Err(ValidationError::NonFinite { field, value });
        }
        if value <= 0.0 {
            return Err(ValidationError::NonPositive { field, value });
        }

        let m_prime = c.elements_per_ris / c.blocks_per_ris;
        let correlation = make_correlation(c.correlation, m_prime)?;
        let blocks = (0..c.n_ris)
            .flat_map(|k| (0..c.blocks_per_ris).map(move |j| (k, j)))
            .map(|(k, j)| {
                let (psi, theta, phi) = draw_phases(c.phase_mode, c.seed, k, j, m_prime);
                RisBlockConfig {
                    ris_index: k,
                    block_index: j,
                    correlation: correlation.clone(),
                    phases_psi: psi,
                    phases_theta: theta,
                    phases_phi: phi,
                    dist_user_m: c.dist_user_m,
                    dist_bs_m: c.dist_bs_m,
                    pathloss_exp: c.pathloss_exp,
                }
            })
            .collect();

        Ok(Self {
            m_prime,
            gamma_t: threshold.gamma_t(),
            budget: LinearBudget::from_db(c.tx_power_db, c.noise_power_db, c.obstacle_coeff),
            blocks,
            config,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Elements per block, `M' = M / J`.
    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    pub fn budget(&self) -> LinearBudget {
        self.budget
    }

    /// Number of candidate paths `N J`.
    pub fn n_paths(&self) -> usize {
        self.config.n_ris * self.config.blocks_per_ris
    }

    /// Blocks ordered by `(k, j)`, RIS-major.
    pub fn blocks(&self) -> &[RisBlockConfig] {
        &self.blocks
    }

    /// Replaces the generated blocks with explicit ones.
    pub fn with_blocks(mut self, blocks: Vec<RisBlockConfig>) -> Result<Self, ValidationError> {
        if blocks.len() != self.n_paths() {
            return Err(ValidationError::Block {
                k: 0,
                j: 0,
                reason: format!("expected {} blocks, got {}", self.n_paths(), blocks.len()),
            });
        }
        for b in &blocks {
            b.check()?;
            if b.m_prime() != self.m_prime {
                return Err(ValidationError::Block {
                    k: b.ris_index,
                    j: b.block_index,
                    reason: format!(
                        "block has {} elements, expected {}",
                        b.m_prime(),
                        self.m_prime
                    ),
                });
            }
        }
        self.blocks = blocks;
        Ok(self)
    }
}

impl FromStr for Scenario {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        Ok(Scenario::validate(ScenarioConfig::parse(s)?)?)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    std::fs::read_to_string(path)?.parse()
}

/// Per-element phases drawn from the block's own stream so that element `e`
/// keeps its phases when `M'` grows.
fn draw_phases(
    mode: PhaseMode,
    seed: u64,
    k: usize,
    j: usize,
    m_prime: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, PHASE_DOMAIN, k as u64, j as u64));
    let mut psi = Vec::with_capacity(m_prime);
    let mut theta = Vec::with_capacity(m_prime);
    let mut phi = Vec::with_capacity(m_prime);
    for _ in 0..m_prime {
        let draws: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        match mode {
            PhaseMode::Random => {
                psi.push(draws[0] * TAU);
                theta.push(draws[1] * TAU);
                phi.push(draws[2] * TAU);
            }
            PhaseMode::Aligned => {
                theta.push(0.0);
                phi.push(draws[2] * TAU);
                psi.push(draws[2] * TAU);
            }
        }
    }
    (psi, theta, phi)
}
