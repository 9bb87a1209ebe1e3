use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use osg_core::scenario::{parse_angle, run_scenario, write_output, RawConfig, ScenarioConfig};
use osg_core::ScenarioError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    fn source(self) -> &'static str {
        match self {
            Preset::Fig1 => include_str!("../presets/fig1.conf"),
            Preset::Fig2 => include_str!("../presets/fig2.conf"),
            Preset::Fig3 => include_str!("../presets/fig3.conf"),
            Preset::Fig4 => include_str!("../presets/fig4.conf"),
        }
    }
}

/// Time series of reduced atomic states, concurrence and partial-transpose
/// spectra for two atoms in separate cavities.
#[derive(Debug, Parser)]
#[command(name = "osg-sim", version)]
struct Cli {
    /// Scenario file (flat `key = value`).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// psi, phi or one_atom.
    #[arg(long)]
    scenario: Option<String>,
    /// Superposition angle in rad or as `pi/N`; repeat for several.
    #[arg(long = "gamma", value_parser = parse_angle)]
    gammas: Vec<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Cross-check every sample against the grid propagation.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    zero_optical_phase: bool,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, ScenarioError> {
    let mut raw = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
            RawConfig::parse(&text)?
        }
        (None, Some(preset)) => RawConfig::parse(preset.source())?,
        (None, None) => RawConfig::default(),
    };
    let mut flags = RawConfig::default();
    if let Some(s) = &cli.scenario {
        flags.set("scenario", s.as_str())?;
    }
    if !cli.gammas.is_empty() {
        let list: Vec<String> = cli.gammas.iter().map(|g| format!("{g:e}")).collect();
        flags.set("gammas", list.join(","))?;
    }
    if let Some(v) = cli.t_max {
        flags.set("t_max", format!("{v:e}"))?;
    }
    if let Some(v) = cli.samples {
        flags.set("n_samples", v.to_string())?;
    }
    if cli.oracle {
        flags.set("run_oracle", "true")?;
    }
    if cli.zero_optical_phase {
        flags.set("zero_optical_phase", "true")?;
    }
    if let Some(v) = &cli.format {
        flags.set("output_format", v.as_str())?;
    }
    if let Some(v) = &cli.out {
        flags.set("output_path", v.display().to_string())?;
    }
    if let Some(v) = cli.workers {
        flags.set("workers", v.to_string())?;
    }
    raw.merge(flags);
    raw.build()
}

fn run(cli: &Cli) -> Result<(), ScenarioError> {
    let cfg = load(cli)?;
    let data = run_scenario(&cfg)?;
    write_output(&cfg, &data)?;
    for d in &data.summary.death_times {
        match d.t_star {
            Some(t) => eprintln!("gamma {:.6}: concurrence extinct after {t:.6e} s", d.gamma),
            None => eprintln!("gamma {:.6}: never entangled", d.gamma),
        }
    }
    if let Some(gap) = data.summary.oracle_max_discrepancy {
        eprintln!("oracle: max entry discrepancy {gap:.3e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
