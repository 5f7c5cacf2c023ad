//! Parameter sweeps over a fixed scenario, CSV output, closed-form vs Monte
//! Carlo agreement reports and gnuplot scripts.
//!
//! Grid points are evaluated in parallel and collected in grid order. With
//! common random numbers every point reuses the same Monte Carlo seed;
//! otherwise point `i` uses [`point_seed`]`(seed, i)`.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::closedform::{scenario_outage, DiagnosticKind, OutageResult};
use crate::model::{Scenario, ScenarioConfig, ScenarioError};
use crate::montecarlo::{estimate_outage, MIN_TRIALS};
use crate::rng::point_seed;

/// Significant digits in CSV numbers.
pub const CSV_DIGITS: usize = 10;

pub const CSV_HEADER: &str = "axis,axis_value,outage_cf,outage_mc,mc_ci,flags";

/// Absolute floor of the agreement tolerance.
pub const AGREEMENT_FLOOR: f64 = 0.02;

/// Multiple of the Monte Carlo half-width in the agreement tolerance.
pub const AGREEMENT_CI_MULTIPLE: f64 = 3.0;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid value {value} at position {index} is not finite")]
    NonFiniteGrid { index: usize, value: f64 },
    #[error("grid is not strictly increasing at position {index}")]
    GridNotIncreasing { index: usize },
    #[error("element count {0} is not a positive integer")]
    NotInteger(f64),
    #[error("element count {value} is not divisible by blocks_per_ris = {j}")]
    NotDivisible { value: u64, j: usize },
    #[error("no evaluation method selected")]
    NoMethods,
    #[error("{0} trials requested; Monte Carlo needs at least {MIN_TRIALS}")]
    TooFewTrials(usize),
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("bad grid value `{0}`")]
    BadGridValue(String),
    #[error("no rows to write")]
    EmptyRows,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SweepError {
    /// True for filesystem failures; every other variant is a problem with
    /// the input.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            SweepError::Io(_) | SweepError::Scenario(ScenarioError::Io(_))
        )
    }
}

/// The scenario parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// `lambda_u` and `lambda_b` set jointly.
    AvgSnrLambda,
    FailProb,
    /// Elements per RIS.
    NElements,
    /// User-side distance in metres.
    DistUser,
    GammaT,
}

impl Axis {
    pub const ALL: [Axis; 5] = [
        Axis::AvgSnrLambda,
        Axis::FailProb,
        Axis::NElements,
        Axis::DistUser,
        Axis::GammaT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::AvgSnrLambda => "avg_snr_lambda",
            Axis::FailProb => "fail_prob",
            Axis::NElements => "n_elements",
            Axis::DistUser => "dist_user",
            Axis::GammaT => "gamma_t",
        }
    }

    /// Axis label for plots.
    pub fn label(self) -> &'static str {
        match self {
            Axis::AvgSnrLambda => "average SNR scale lambda (lambda_U = lambda_B)",
            Axis::FailProb => "element failure probability p",
            Axis::NElements => "elements per RIS M",
            Axis::DistUser => "RIS-user distance d_U [m]",
            Axis::GammaT => "SNR threshold gamma_T",
        }
    }

    /// `cfg` with the axis parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, ScenarioError> {
        let v = format!("{value:?}");
        match self {
            Axis::AvgSnrLambda => {
                cfg.with_overrides([("lambda_u", v.as_str()), ("lambda_b", v.as_str())])
            }
            Axis::FailProb => cfg.with_overrides([("fail_prob", v.as_str())]),
            Axis::NElements => {
                let m = format!("{}", value as u64);
                cfg.with_overrides([("elements_per_ris", m.as_str())])
            }
            Axis::DistUser => cfg.with_overrides([("dist_user_m", v.as_str())]),
            Axis::GammaT => cfg.with_overrides([("gamma_t", v.as_str())]),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| SweepError::UnknownAxis(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Methods {
    pub closed_form: bool,
    pub monte_carlo: bool,
}

impl Methods {
    pub const BOTH: Methods = Methods {
        closed_form: true,
        monte_carlo: true,
    };
}

impl FromStr for Methods {
    type Err = SweepError;

    /// Comma-separated subset of `cf`/`closed_form` and `mc`/`monte_carlo`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut m = Methods {
            closed_form: false,
            monte_carlo: false,
        };
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "cf" | "closed_form" => m.closed_form = true,
                "mc" | "monte_carlo" => m.monte_carlo = true,
                other => return Err(SweepError::UnknownMethod(other.to_string())),
            }
        }
        if !(m.closed_form || m.monte_carlo) {
            return Err(SweepError::NoMethods);
        }
        Ok(m)
    }
}

impl fmt::Display for Methods {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [(self.closed_form, "cf"), (self.monte_carlo, "mc")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses a comma-separated list of grid values.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, SweepError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| SweepError::BadGridValue(t.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub fixed: Scenario,
    pub methods: Methods,
    pub trials: usize,
    /// Monte Carlo seed. Phases come from the scenario's own seed.
    pub seed: u64,
    /// Reuse the same Monte Carlo seed at every grid point.
    pub crn: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::EmptyGrid);
        }
        for (index, &value) in self.grid.iter().enumerate() {
            if !value.is_finite() {
                return Err(SweepError::NonFiniteGrid { index, value });
            }
            if index > 0 && value <= self.grid[index - 1] {
                return Err(SweepError::GridNotIncreasing { index });
            }
        }
        if self.axis == Axis::NElements {
            let j = self.fixed.config().blocks_per_ris;
            for &v in &self.grid {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(SweepError::NotInteger(v));
                }
                if !(v as u64).is_multiple_of(j as u64) {
                    return Err(SweepError::NotDivisible { value: v as u64, j });
                }
            }
        }
        if !(self.methods.closed_form || self.methods.monte_carlo) {
            return Err(SweepError::NoMethods);
        }
        if self.methods.monte_carlo && self.trials < MIN_TRIALS {
            return Err(SweepError::TooFewTrials(self.trials));
        }
        Ok(())
    }

    fn mc_seed(&self, index: usize) -> u64 {
        if self.crn {
            self.seed
        } else {
            point_seed(self.seed, index)
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub outage_cf: Option<f64>,
    pub outage_mc: Option<f64>,
    pub mc_ci: Option<f64>,
    /// Closed-form diagnostics and per-point errors, `;`-separated.
    pub cf_flags: String,
}

/// Evaluates every grid point. Only an invalid spec is an error; failures
/// at individual points are recorded in the row's flags.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    Ok(spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| evaluate_point(spec, i, v))
        .collect())
}

fn evaluate_point(spec: &SweepSpec, index: usize, value: f64) -> SweepRow {
    let mut row = SweepRow {
        axis: spec.axis,
        axis_value: value,
        outage_cf: None,
        outage_mc: None,
        mc_ci: None,
        cf_flags: String::new(),
    };
    let scn = match spec
        .axis
        .apply(spec.fixed.config(), value)
        .and_then(|cfg| Scenario::validate(cfg).map_err(ScenarioError::from))
    {
        Ok(s) => s,
        Err(e) => {
            row.cf_flags = format!("invalid_point({e})");
            return row;
        }
    };
    let mut flags = Vec::new();
    if spec.methods.closed_form {
        match scenario_outage(&scn) {
            Ok(r) => {
                row.outage_cf = Some(r.probability);
                flags.extend(summarize_diagnostics(&r));
            }
            Err(e) => flags.push(format!("cf_error({e})")),
        }
    }
    if spec.methods.monte_carlo {
        match estimate_outage(&scn, scn.gamma_t(), spec.trials, spec.mc_seed(index)) {
            Ok(est) => {
                row.outage_mc = Some(est.outage_prob);
                row.mc_ci = Some(est.ci_halfwidth);
            }
            Err(e) => flags.push(format!("mc_error({e})")),
        }
    }
    row.cf_flags = flags.join(";");
    row
}

/// One entry per diagnostic kind: the worst occurrence, with a count when
/// there are several.
fn summarize_diagnostics(r: &OutageResult) -> Vec<String> {
    let severity = |k: &DiagnosticKind| match *k {
        DiagnosticKind::RawOutOfRange(v) => (0, (v - v.clamp(0.0, 1.0)).abs()),
        DiagnosticKind::CancellationLoss(d) => (1, d),
        DiagnosticKind::K1Underflow(n) => (2, n as f64),
    };
    let mut out = Vec::new();
    for kind in 0..3 {
        let group: Vec<_> = r
            .diagnostics
            .iter()
            .filter(|d| severity(&d.kind).0 == kind)
            .collect();
        let Some(worst) = group
            .iter()
            .max_by(|a, b| severity(&a.kind).1.total_cmp(&severity(&b.kind).1))
        else {
            continue;
        };
        if group.len() > 1 {
            out.push(format!("{worst}x{}", group.len()));
        } else {
            out.push(worst.to_string());
        }
    }
    out
}

/// Renders `x` with [`CSV_DIGITS`] significant digits; plain decimal for
/// moderate magnitudes, scientific otherwise.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..CSV_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn sanitize_flags(flags: &str) -> String {
    flags
        .chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

pub fn render_csv(rows: &[SweepRow]) -> Result<String, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::EmptyRows);
    }
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.axis,
            format_sig(r.axis_value),
            opt(r.outage_cf),
            opt(r.outage_mc),
            opt(r.mc_ci),
            sanitize_flags(&r.cf_flags)
        );
    }
    Ok(out)
}

pub fn emit_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<(), SweepError> {
    let text = render_csv(rows)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses text produced by [`render_csv`].
pub fn read_csv(text: &str) -> Result<Vec<SweepRow>, SweepError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(SweepError::Csv {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let bad = |message: String| SweepError::Csv {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.splitn(6, ',').collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, got {}", fields.len())));
        }
        let num = |s: &str| -> Result<Option<f64>, SweepError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| bad(format!("bad number {s:?}")))
            }
        };
        rows.push(SweepRow {
            axis: fields[0]
                .parse()
                .map_err(|e: SweepError| bad(e.to_string()))?,
            axis_value: num(fields[1])?.ok_or_else(|| bad("missing axis value".into()))?,
            outage_cf: num(fields[2])?,
            outage_mc: num(fields[3])?,
            mc_ci: num(fields[4])?,
            cf_flags: fields[5].to_string(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Diverge,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Agree => "agree",
            Verdict::Diverge => "diverge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGap {
    pub axis_value: f64,
    pub outage_cf: f64,
    pub outage_mc: f64,
    pub gap: f64,
    /// `max(AGREEMENT_FLOOR, AGREEMENT_CI_MULTIPLE * ci)`.
    pub tolerance: f64,
}

impl PointGap {
    pub fn within(&self) -> bool {
        self.gap <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub axis: Option<Axis>,
    pub points: Vec<PointGap>,
    /// Rows lacking one of the two estimates.
    pub skipped: usize,
    pub verdict: Verdict,
    /// Point with the largest absolute gap.
    pub worst: Option<PointGap>,
}

impl AgreementReport {
    pub fn max_gap(&self) -> f64 {
        self.worst.map_or(0.0, |w| w.gap)
    }
}

/// Compares closed form and Monte Carlo at every row carrying both.
pub fn agreement_report(rows: &[SweepRow]) -> AgreementReport {
    let mut points = Vec::new();
    let mut skipped = 0;
    for r in rows {
        match (r.outage_cf, r.outage_mc) {
            (Some(cf), Some(mc)) => points.push(PointGap {
                axis_value: r.axis_value,
                outage_cf: cf,
                outage_mc: mc,
                gap: (cf - mc).abs(),
                tolerance: AGREEMENT_FLOOR.max(AGREEMENT_CI_MULTIPLE * r.mc_ci.unwrap_or(0.0)),
            }),
            _ => skipped += 1,
        }
    }
    let worst = points
        .iter()
        .copied()
        .reduce(|a, b| if b.gap > a.gap { b } else { a });
    let verdict = if points.iter().all(PointGap::within) {
        Verdict::Agree
    } else {
        Verdict::Diverge
    };
    AgreementReport {
        axis: rows.first().map(|r| r.axis),
        points,
        skipped,
        verdict,
        worst,
    }
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = self.axis.map_or("axis", Axis::name);
        writeln!(f, "{axis},outage_cf,outage_mc,gap,tolerance,within")?;
        for p in &self.points {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                format_sig(p.axis_value),
                format_sig(p.outage_cf),
                format_sig(p.outage_mc),
                format_sig(p.gap),
                format_sig(p.tolerance),
                if p.within() { "yes" } else { "no" }
            )?;
        }
        if self.skipped > 0 {
            writeln!(f, "skipped rows without both estimates: {}", self.skipped)?;
        }
        match self.worst {
            Some(w) => writeln!(
                f,
                "verdict: {} (max gap {} at {axis} = {})",
                self.verdict,
                format_sig(w.gap),
                format_sig(w.axis_value)
            ),
            None => writeln!(f, "verdict: {} (no comparable points)", self.verdict),
        }
    }
}

/// A gnuplot script plotting each `(title, csv file)` series: Monte Carlo
/// with error bars and the closed form as lines.
pub fn plot_script(
    title: &str,
    axis: Axis,
    series: &[(String, String)],
    output_png: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{output_png}'");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', ""));
    let _ = writeln!(s, "set xlabel '{}'", axis.label());
    let _ = writeln!(s, "set ylabel 'outage probability'");
    let _ = writeln!(s, "set yrange [0:1.05]");
    let _ = writeln!(s, "set key outside right");
    let mut parts = Vec::new();
    for (i, (name, file)) in series.iter().enumerate() {
        let lt = i + 1;
        parts.push(format!(
            "'{file}' every ::1 using 2:4:5 with yerrorbars lt {lt} pt 7 title '{name} MC'"
        ));
        parts.push(format!(
            "'{file}' every ::1 using 2:3 with lines lt {lt} dt 2 title '{name} closed form'"
        ));
    }
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n_ris = 4\nblocks_per_ris = 4\nelements_per_ris = 32\n\
        tx_power_db = 30\nnoise_power_db = 10\nrho1 = 0.1\nrho2 = 0.1\n\
        lambda_u = 1\nlambda_b = 1\nfail_prob = 0\ntarget_rate = 1\n\
        dist_user_m = 4\ndist_bs_m = 4\npathloss_exp = 2\nseed = 1\n";

    fn spec(axis: Axis, grid: Vec<f64>) -> SweepSpec {
        SweepSpec {
            axis,
            grid,
            fixed: BASE.parse().unwrap(),
            methods: Methods::BOTH,
            trials: MIN_TRIALS,
            seed: 3,
            crn: true,
        }
    }

    fn row(v: f64, cf: Option<f64>, mc: Option<f64>, ci: Option<f64>) -> SweepRow {
        SweepRow {
            axis: Axis::FailProb,
            axis_value: v,
            outage_cf: cf,
            outage_mc: mc,
            mc_ci: ci,
            cf_flags: String::new(),
        }
    }

    #[test]
    fn axis_and_methods_parse() {
        for a in Axis::ALL {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
        assert!("lambda".parse::<Axis>().is_err());
        assert_eq!("cf,mc".parse::<Methods>().unwrap(), Methods::BOTH);
        let cf: Methods = "closed_form".parse().unwrap();
        assert!(cf.closed_form && !cf.monte_carlo);
        assert!("".parse::<Methods>().is_err());
        assert!("cf,xx".parse::<Methods>().is_err());
        assert_eq!(parse_grid("8, 16,32").unwrap(), vec![8.0, 16.0, 32.0]);
        assert!(parse_grid("1,a").is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            spec(Axis::FailProb, vec![]).validate(),
            Err(SweepError::EmptyGrid)
        ));
        assert!(matches!(
            spec(Axis::FailProb, vec![0.1, 0.1]).validate(),
            Err(SweepError::GridNotIncreasing { index: 1 })
        ));
        assert!(matches!(
            spec(Axis::NElements, vec![8.0, 30.0]).validate(),
            Err(SweepError::NotDivisible { value: 30, j: 4 })
        ));
        assert!(matches!(
            spec(Axis::NElements, vec![8.5]).validate(),
            Err(SweepError::NotInteger(_))
        ));
        let mut s = spec(Axis::FailProb, vec![0.0]);
        s.trials = 10;
        assert!(matches!(s.validate(), Err(SweepError::TooFewTrials(10))));
        s.methods = "cf".parse().unwrap();
        assert!(s.validate().is_ok());
    }

    #[test]
    fn axis_apply_sets_fields() {
        let cfg = ScenarioConfig::parse(BASE).unwrap();
        let c = Axis::AvgSnrLambda.apply(&cfg, 2.5).unwrap();
        assert_eq!((c.lambda_u, c.lambda_b), (2.5, 2.5));
        assert_eq!(
            Axis::NElements.apply(&cfg, 48.0).unwrap().elements_per_ris,
            48
        );
        assert_eq!(Axis::DistUser.apply(&cfg, 7.0).unwrap().dist_user_m, 7.0);
        let g = Axis::GammaT.apply(&cfg, 5.0).unwrap();
        assert_eq!((g.gamma_t, g.target_rate), (Some(5.0), None));
    }

    #[test]
    fn invalid_point_is_flagged_not_fatal() {
        let mut s = spec(Axis::FailProb, vec![0.0, 1.5]);
        s.methods = "cf".parse().unwrap();
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].outage_cf.is_some());
        assert!(rows[1].outage_cf.is_none());
        assert!(
            rows[1].cf_flags.starts_with("invalid_point"),
            "{}",
            rows[1].cf_flags
        );
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let rows = run_sweep(&spec(Axis::FailProb, vec![0.0, 0.2, 0.5, 0.7])).unwrap();
        let values: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
        assert_eq!(values, vec![0.0, 0.2, 0.5, 0.7]);
        for r in &rows {
            let mc = r.outage_mc.unwrap();
            assert!((0.0..=1.0).contains(&mc));
            assert!((0.0..=1.0).contains(&r.outage_cf.unwrap()));
        }
    }

    #[test]
    fn significant_digit_rendering() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(0.5), "0.5000000000");
        assert_eq!(format_sig(1.0), "1.000000000");
        assert_eq!(format_sig(48.0), "48.00000000");
        assert_eq!(format_sig(0.123456789012), "0.1234567890");
        assert_eq!(format_sig(1.5e-7), "1.500000000e-7");
        assert_eq!(format_sig(9.99999999999), "10.00000000");
        assert_eq!(format_sig(-0.25), "-0.2500000000");
    }

    #[test]
    fn csv_cf_only_row() {
        let text = render_csv(&[row(0.5, Some(0.25), None, None)]).unwrap();
        assert_eq!(
            text,
            format!("{CSV_HEADER}\nfail_prob,0.5000000000,0.2500000000,,,\n")
        );
        assert!(matches!(render_csv(&[]), Err(SweepError::EmptyRows)));
    }

    #[test]
    fn csv_flags_never_add_columns() {
        let mut r = row(0.1, Some(0.3), Some(0.31), Some(0.004));
        r.cf_flags = "a,b\nc".into();
        let text = render_csv(&[r]).unwrap();
        let back = read_csv(&text).unwrap();
        assert_eq!(back[0].cf_flags, "a;b c");
    }

    #[test]
    fn csv_round_trip_fifty_rows() {
        let rows: Vec<SweepRow> = (0..50)
            .map(|i| {
                let x = i as f64 / 49.0;
                row(x, Some(x * x), Some(0.5 * x), Some(1e-3 + x * 1e-4))
            })
            .collect();
        let text = render_csv(&rows).unwrap();
        assert_eq!(text.lines().count(), 51);
        assert_eq!(text, render_csv(&rows).unwrap());
        let back = read_csv(&text).unwrap();
        assert_eq!(back.len(), 50);
        for (a, b) in rows.iter().zip(&back) {
            assert!((a.axis_value - b.axis_value).abs() <= 1e-9 * a.axis_value.abs().max(1e-300));
            let (x, y) = (a.outage_cf.unwrap(), b.outage_cf.unwrap());
            assert!((x - y).abs() <= 1e-9 * x.abs());
        }
        assert!(read_csv("nope\n").is_err());
    }

    #[test]
    fn agreement_exact_match() {
        let rows = vec![row(0.0, Some(0.3), Some(0.3), Some(0.001)); 3];
        let rep = agreement_report(&rows);
        assert_eq!(rep.verdict, Verdict::Agree);
        assert_eq!(rep.max_gap(), 0.0);
    }

    #[test]
    fn agreement_names_diverging_point() {
        let ci = 0.01;
        let rows = vec![
            row(0.0, Some(0.3), Some(0.3), Some(ci)),
            row(0.2, Some(0.4 + 10.0 * ci), Some(0.4), Some(ci)),
            row(0.5, Some(0.5), Some(0.5), Some(ci)),
            row(0.7, Some(0.6), None, None),
        ];
        let rep = agreement_report(&rows);
        assert_eq!(rep.verdict, Verdict::Diverge);
        assert_eq!(rep.worst.unwrap().axis_value, 0.2);
        assert_eq!(rep.skipped, 1);
        let text = rep.to_string();
        assert!(text.contains("verdict: diverge"), "{text}");
        assert!(text.contains("fail_prob = 0.2000000000"), "{text}");
    }

    #[test]
    fn tolerance_floor_applies() {
        let rows = vec![row(1.0, Some(0.31), Some(0.3), Some(1e-4))];
        assert_eq!(agreement_report(&rows).verdict, Verdict::Agree);
        let rows = vec![row(1.0, Some(0.33), Some(0.3), Some(1e-4))];
        assert_eq!(agreement_report(&rows).verdict, Verdict::Diverge);
    }

    #[test]
    fn plot_script_lists_series() {
        let s = plot_script(
            "demo",
            Axis::DistUser,
            &[("a".into(), "a.csv".into()), ("b".into(), "b.csv".into())],
            "demo.png",
        );
        assert!(s.contains("'a.csv' every ::1 using 2:4:5"));
        assert!(s.contains("'b.csv' every ::1 using 2:3"));
        assert!(s.contains("set datafile separator ','"));
    }
}
