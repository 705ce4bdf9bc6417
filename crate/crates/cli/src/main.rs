use clap::{Parser, Subcommand, ValueEnum};
use molatom_cli::envelope::ResultEnvelope;
use molatom_cli::{export, overrides, scenarios, CliError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "molatom", version, about = "Simulation scenarios for hybrid molecule-atom arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write its result envelope as JSON
    Run {
        scenario: Scenario,
        /// TOML configuration file; omitted fields take scenario defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// RNG seed (overrides the config file's seed)
        #[arg(long)]
        seed: Option<u64>,
        /// Envelope output path (default molatom-<scenario>.json)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Budget scenario: molecular species to budget
        #[arg(long)]
        species: Option<String>,
        /// Budget scenario: species database file replacing the embedded one
        #[arg(long)]
        species_file: Option<PathBuf>,
        /// Gate-sim scenario: peak drive over coupling
        #[arg(long)]
        omega_ratio: Option<f64>,
        /// Trailing overrides, key=value with dotted paths (measure.theta=0.2)
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Export a plot series from a result envelope to CSV
    Export {
        /// Path to a result envelope written by `run`
        envelope: PathBuf,
        #[arg(long)]
        kind: ExportKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    GateSim,
    Budget,
    Ghz,
    Toric,
    Criticality,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::GateSim => "gate-sim",
            Scenario::Budget => "budget",
            Scenario::Ghz => "ghz",
            Scenario::Toric => "toric",
            Scenario::Criticality => "criticality",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    PhaseVsRatio,
    GapScan,
    OutcomeHistogram,
}

impl ExportKind {
    fn name(self) -> &'static str {
        match self {
            ExportKind::PhaseVsRatio => "phase-vs-ratio",
            ExportKind::GapScan => "gap-scan",
            ExportKind::OutcomeHistogram => "outcome-histogram",
        }
    }
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("MOLATOM_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("thread pool configured before first use");
            }
            _ => {
                eprintln!("warning: MOLATOM_THREADS='{raw}' is not a positive integer, ignoring");
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    scenario: Scenario,
    config: Option<PathBuf>,
    seed_flag: Option<u64>,
    out: Option<PathBuf>,
    species: Option<String>,
    species_file: Option<PathBuf>,
    omega_ratio: Option<f64>,
    override_args: Vec<String>,
) -> Result<(), CliError> {
    let mut table = overrides::load_table(config.as_deref())?;
    if let Some(s) = species {
        overrides::set_path(&mut table, "species", toml::Value::String(s))?;
    }
    if let Some(p) = species_file {
        overrides::set_path(
            &mut table,
            "species_file",
            toml::Value::String(p.display().to_string()),
        )?;
    }
    if let Some(r) = omega_ratio {
        overrides::set_path(&mut table, "omega_ratio", toml::Value::Float(r))?;
    }
    for spec in &override_args {
        overrides::apply_override(&mut table, spec)?;
    }
    let common = overrides::split_common(&mut table)?;
    if let Some(named) = &common.scenario {
        if named != scenario.name() {
            return Err(CliError::Config(format!(
                "config file names scenario '{named}' but '{}' was requested",
                scenario.name()
            )));
        }
    }
    let seed = seed_flag.or(common.seed).unwrap_or(0);
    let envelope = scenarios::run_scenario(scenario.name(), table, seed)?;
    let out_path = out
        .or(common.output_path.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("molatom-{}.json", scenario.name())));
    envelope.write(&out_path)?;
    println!(
        "{} seed={} completed in {:.3}s -> {}",
        scenario.name(),
        seed,
        envelope.timing_seconds,
        out_path.display()
    );
    Ok(())
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run {
            scenario,
            config,
            seed,
            out,
            species,
            species_file,
            omega_ratio,
            overrides,
        } => run(
            scenario,
            config,
            seed,
            out,
            species,
            species_file,
            omega_ratio,
            overrides,
        ),
        Cmd::Export {
            envelope,
            kind,
            out,
        } => ResultEnvelope::from_path(&envelope).and_then(|env| {
            let rows = export::export_csv(&env, kind.name(), &out)?;
            println!("{} rows -> {}", rows, out.display());
            Ok(())
        }),
    };
    if let Err(e) = outcome {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
