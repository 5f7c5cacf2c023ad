//! Bundled sweep presets.
//!
//! A preset file is a scenario file extended with sweep keys (`title`,
//! `axis`, `grid`, `methods`, `trials`, `mc_seed`, `crn`) and any number of
//! `series.<name> = key=value, key=value` lines. Each series overrides
//! scenario keys of the base and is swept over the same grid.

use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{parse_pairs, Scenario, ScenarioConfig, ScenarioError, SCENARIO_KEYS};
use crate::sweep::{
    agreement_report, emit_csv, parse_grid, plot_script, run_sweep, Axis, Methods, SweepError,
    SweepRow, SweepSpec,
};

const BUILTIN: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.cfg")),
    ("fig3", include_str!("../presets/fig3.cfg")),
    ("fig4", include_str!("../presets/fig4.cfg")),
    ("fig5", include_str!("../presets/fig5.cfg")),
];

const SWEEP_KEYS: &[&str] = &[
    "title", "axis", "grid", "methods", "trials", "mc_seed", "crn",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub overrides: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub title: String,
    pub base: ScenarioConfig,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub methods: Methods,
    pub trials: usize,
    pub seed: u64,
    pub crn: bool,
    pub series: Vec<Series>,
}

fn preset_err(line: usize, message: String) -> SweepError {
    SweepError::Scenario(ScenarioError::Parse { line, message })
}

impl Preset {
    pub fn parse(name: &str, text: &str) -> Result<Self, SweepError> {
        let pairs = parse_pairs(text)?;
        let mut scenario = Vec::new();
        let mut series = Vec::new();
        let mut sweep: Vec<(usize, String, String)> = Vec::new();
        for (line, key, value) in pairs {
            if let Some(series_name) = key.strip_prefix("series.") {
                series.push(parse_series(line, series_name, &value)?);
            } else if SWEEP_KEYS.contains(&key.as_str()) {
                sweep.push((line, key, value));
            } else if SCENARIO_KEYS.contains(&key.as_str()) {
                scenario.push((key, value));
            } else {
                return Err(preset_err(line, format!("unknown key `{key}`")));
            }
        }
        let get = |k: &str| sweep.iter().find(|(_, key, _)| key == k);
        let require =
            |k: &str| get(k).ok_or_else(|| preset_err(0, format!("missing sweep key `{k}`")));
        let parse_num = |k: &str| -> Result<u64, SweepError> {
            let (line, _, v) = require(k)?;
            v.parse()
                .map_err(|_| preset_err(*line, format!("`{k}` must be a non-negative integer")))
        };
        let crn = match get("crn") {
            None => false,
            Some((line, _, v)) => v
                .parse()
                .map_err(|_| preset_err(*line, "`crn` must be true or false".into()))?,
        };
        if series.is_empty() {
            series.push(Series {
                name: "main".into(),
                overrides: Vec::new(),
            });
        }
        Ok(Preset {
            name: name.to_string(),
            title: get("title").map_or_else(|| name.to_string(), |(_, _, v)| v.clone()),
            base: ScenarioConfig::from_pairs(
                scenario.iter().map(|(k, v)| (k.as_str(), v.as_str())),
            )?,
            axis: require("axis")?.2.parse()?,
            grid: parse_grid(&require("grid")?.2)?,
            methods: require("methods")?.2.parse()?,
            trials: parse_num("trials")? as usize,
            seed: parse_num("mc_seed")?,
            crn,
            series,
        })
    }

    /// One validated sweep per series, optionally with a different trial
    /// count.
    pub fn specs(&self, trials: Option<usize>) -> Result<Vec<(String, SweepSpec)>, SweepError> {
        self.series
            .iter()
            .map(|s| {
                let cfg = self
                    .base
                    .with_overrides(s.overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
                let spec = SweepSpec {
                    axis: self.axis,
                    grid: self.grid.clone(),
                    fixed: Scenario::validate(cfg).map_err(ScenarioError::from)?,
                    methods: self.methods,
                    trials: trials.unwrap_or(self.trials),
                    seed: self.seed,
                    crn: self.crn,
                };
                spec.validate()?;
                Ok((s.name.clone(), spec))
            })
            .collect()
    }
}

fn parse_series(line: usize, name: &str, value: &str) -> Result<Series, SweepError> {
    if name.is_empty() || name.contains(['/', '\\', ' ']) {
        return Err(preset_err(line, format!("bad series name {name:?}")));
    }
    let mut overrides = Vec::new();
    for item in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let Some((k, v)) = item.split_once('=') else {
            return Err(preset_err(
                line,
                format!("expected key=value, got {item:?}"),
            ));
        };
        let (k, v) = (k.trim(), v.trim());
        if !SCENARIO_KEYS.contains(&k) {
            return Err(preset_err(
                line,
                format!("unknown scenario key `{k}` in series"),
            ));
        }
        overrides.push((k.to_string(), v.to_string()));
    }
    Ok(Series {
        name: name.to_string(),
        overrides,
    })
}

/// The bundled presets in name order.
pub fn builtin_presets() -> Vec<Preset> {
    BUILTIN
        .iter()
        .map(|(name, text)| Preset::parse(name, text).expect("bundled preset parses"))
        .collect()
}

pub fn builtin_preset(name: &str) -> Option<Preset> {
    let name = name.trim_end_matches(".cfg");
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| Preset::parse(n, text).expect("bundled preset parses"))
}

/// Source text of a bundled preset.
pub fn builtin_preset_text(name: &str) -> Option<&'static str> {
    let name = name.trim_end_matches(".cfg");
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRows {
    pub name: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub preset: String,
    pub title: String,
    pub axis: Axis,
    pub series: Vec<SeriesRows>,
}

pub fn run_preset(preset: &Preset, trials: Option<usize>) -> Result<PresetRun, SweepError> {
    let specs = preset.specs(trials)?;
    let mut series = Vec::with_capacity(specs.len());
    for (name, spec) in specs {
        series.push(SeriesRows {
            name,
            rows: run_sweep(&spec)?,
        });
    }
    Ok(PresetRun {
        preset: preset.name.clone(),
        title: preset.title.clone(),
        axis: preset.axis,
        series,
    })
}

impl PresetRun {
    /// Agreement reports of all series, one section each.
    pub fn agreement_text(&self) -> String {
        let mut out = String::new();
        for s in &self.series {
            out.push_str(&format!("[{}]\n", s.name));
            out.push_str(&agreement_report(&s.rows).to_string());
            out.push('\n');
        }
        out
    }

    /// Writes `<preset>_<series>.csv` per series, `<preset>_agreement.txt`
    /// and `<preset>.gp` into `dir`. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut plotted = Vec::new();
        for s in &self.series {
            let file = format!("{}_{}.csv", self.preset, s.name);
            let path = dir.join(&file);
            emit_csv(&s.rows, &path)?;
            written.push(path);
            plotted.push((s.name.clone(), file));
        }
        let report = dir.join(format!("{}_agreement.txt", self.preset));
        fs::write(&report, self.agreement_text())?;
        written.push(report);
        let script = dir.join(format!("{}.gp", self.preset));
        fs::write(
            &script,
            plot_script(
                &self.title,
                self.axis,
                &plotted,
                &format!("{}.png", self.preset),
            ),
        )?;
        written.push(script);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_presets_parse_and_validate() {
        let presets = builtin_presets();
        let names: Vec<&str> = presets.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["fig2", "fig3", "fig4", "fig5"]);
        for p in &presets {
            let specs = p.specs(None).unwrap();
            assert!(!specs.is_empty());
            assert_eq!(p.trials, 100_000);
            assert!(p.crn);
        }
        assert!(builtin_preset("fig4.cfg").is_some());
        assert!(builtin_preset("fig9").is_none());
    }

    #[test]
    fn series_override_base() {
        let p = builtin_preset("fig3").unwrap();
        let specs = p.specs(Some(20_000)).unwrap();
        let obstacle = &specs[1].1;
        assert_eq!(specs[1].0, "obstacle_p0");
        assert_eq!(obstacle.fixed.config().obstacle_coeff, 0.1);
        assert_eq!(obstacle.trials, 20_000);
    }

    #[test]
    fn rejects_unknown_keys() {
        let good = builtin_preset_text("fig2").unwrap();
        let bad = format!("{good}\nfrobnicate = 1\n");
        assert!(Preset::parse("x", &bad).is_err());
        let bad = format!("{good}\nseries.z = warp=9\n");
        assert!(Preset::parse("x", &bad).is_err());
        let missing = good.replace("axis = avg_snr_lambda", "");
        assert!(Preset::parse("x", &missing).is_err());
    }

    #[test]
    fn single_series_default() {
        let text: String = builtin_preset_text("fig2")
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("series."))
            .map(|l| format!("{l}\n"))
            .collect();
        let p = Preset::parse("plain", &text).unwrap();
        assert_eq!(p.series.len(), 1);
        assert_eq!(p.series[0].name, "main");
    }
}
