use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_outage::preset::{builtin_preset, builtin_preset_text, builtin_presets};
use ris_outage::sweep::{
    agreement_report, emit_csv, parse_grid, plot_script, run_sweep, Axis, Methods, SweepError,
    SweepSpec,
};
use ris_outage::{load_scenario, run_preset, ScenarioError};

const THREADS_ENV: &str = "RIS_OUTAGE_THREADS";

/// Outage probability of RIS-assisted links: closed form and Monte Carlo.
#[derive(Parser, Debug)]
#[command(name = "ris-outage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep one scenario parameter and write CSV, plot script and report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// avg_snr_lambda | fail_prob | n_elements | dist_user | gamma_t
        #[arg(long)]
        axis: String,
        /// Comma-separated, strictly increasing values.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "cf,mc")]
        methods: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// Monte Carlo seed; element phases use the scenario's `seed`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Same random numbers at every grid point.
        #[arg(long)]
        crn: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Bundled sweep presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand, Debug)]
enum PresetAction {
    List,
    /// Print a preset's source.
    Show {
        name: String,
    },
    Run {
        name: String,
        /// Output directory, `out/<name>` by default.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the preset's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        if e.is_runtime() {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        SweepError::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Validation(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            scenario,
            axis,
            grid,
            methods,
            trials,
            seed,
            crn,
            out,
        } => {
            let spec = SweepSpec {
                axis: axis.parse()?,
                grid: parse_grid(&grid)?,
                fixed: load_scenario(&scenario)?,
                methods: methods.parse()?,
                trials,
                seed,
                crn,
            };
            run(&spec, &out)
        }
        Command::Validate { scenario } => {
            let scn = load_scenario(&scenario)?;
            let cfg = scn.config();
            println!("ok: {}", scenario.display());
            println!(
                "  blocks        {} x {} (M' = {})",
                cfg.n_ris,
                cfg.blocks_per_ris,
                scn.m_prime()
            );
            println!("  gamma_t       {}", scn.gamma_t());
            println!("  omega         {}", scn.budget().omega);
            println!("  correlation   {:?}", cfg.correlation);
            println!("  phase_mode    {}", cfg.phase_mode);
            Ok(())
        }
        Command::Presets { action } => presets(action),
    }
}

fn run(spec: &SweepSpec, out: &Path) -> Result<(), Failure> {
    let rows = run_sweep(spec)?;
    std::fs::create_dir_all(out).map_err(SweepError::from)?;
    let csv = out.join("sweep.csv");
    emit_csv(&rows, &csv)?;
    println!("wrote {}", csv.display());
    let script = out.join("sweep.gp");
    let text = plot_script(
        &format!("outage vs {}", spec.axis),
        spec.axis,
        &[("sweep".to_string(), "sweep.csv".to_string())],
        "sweep.png",
    );
    std::fs::write(&script, text).map_err(SweepError::from)?;
    println!("wrote {}", script.display());
    if spec.methods == Methods::BOTH {
        let report = agreement_report(&rows);
        let path = out.join("agreement.txt");
        std::fs::write(&path, report.to_string()).map_err(SweepError::from)?;
        println!("wrote {}", path.display());
        print_verdict(&report, spec.axis);
    }
    Ok(())
}

fn print_verdict(report: &ris_outage::AgreementReport, axis: Axis) {
    match report.worst {
        Some(w) => println!(
            "closed form vs Monte Carlo: {} (max gap {:.4} at {axis} = {})",
            report.verdict, w.gap, w.axis_value
        ),
        None => println!("closed form vs Monte Carlo: no comparable points"),
    }
}

fn presets(action: PresetAction) -> Result<(), Failure> {
    match action {
        PresetAction::List => {
            for p in builtin_presets() {
                let series: Vec<&str> = p.series.iter().map(|s| s.name.as_str()).collect();
                println!(
                    "{:<6} {} [axis {}; series {}]",
                    p.name,
                    p.title,
                    p.axis,
                    series.join(", ")
                );
            }
            Ok(())
        }
        PresetAction::Show { name } => {
            let text = builtin_preset_text(&name)
                .ok_or_else(|| Failure::Validation(format!("no preset named `{name}`")))?;
            print!("{text}");
            Ok(())
        }
        PresetAction::Run { name, out, trials } => {
            let preset = builtin_preset(&name)
                .ok_or_else(|| Failure::Validation(format!("no preset named `{name}`")))?;
            let dir = out.unwrap_or_else(|| Path::new("out").join(&preset.name));
            let result = run_preset(&preset, trials)?;
            for path in result.write(&dir)? {
                println!("wrote {}", path.display());
            }
            for s in &result.series {
                print!("{}: ", s.name);
                print_verdict(&agreement_report(&s.rows), result.axis);
            }
            Ok(())
        }
    }
}
