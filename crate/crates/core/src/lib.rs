//! Outage probability of RIS-assisted wireless paths under correlated
//! fading, outdated CSI, obstacle attenuation and random element failures.
//!
//! The closed-form evaluator ([`closedform`]) and an independent Monte Carlo
//! estimator ([`montecarlo`]) share one scenario model ([`model`]);
//! [`sweep`] runs both over parameter grids and writes CSV, gnuplot and
//! agreement-report artifacts.

pub mod closedform;
pub mod failure;
pub mod model;
pub mod montecarlo;
mod numeric;
pub mod preset;
pub mod rng;
pub mod specfun;
pub mod sweep;
pub mod upsilon;

pub use closedform::{
    failure_pmf, outage_closed_form, outage_with_failures, scenario_outage, Method, OutageResult,
    SelectedLinkDist,
};
pub use failure::{first_q_pattern, sample_pattern, FailurePattern};
pub use model::{
    load_scenario, make_correlation, CorrelationKind, LinearBudget, PhaseMode, RisBlockConfig,
    Scenario, ScenarioConfig, ScenarioError, ValidationError,
};
pub use montecarlo::{estimate_outage, run_trial, McEstimate, TrialDraw};
pub use preset::{builtin_preset, builtin_presets, run_preset, Preset, PresetRun};
pub use sweep::{
    agreement_report, emit_csv, read_csv, render_csv, run_sweep, AgreementReport, Axis, Methods,
    SweepError, SweepRow, SweepSpec, Verdict,
};
pub use upsilon::{upsilon_direct, upsilon_expanded, zeta, UpsilonValue};
