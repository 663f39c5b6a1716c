use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracdyn::commands::{self, PointSpec};
use fracdyn::config::{parse_f64_list, parse_list, parse_real, ExperimentConfig};
use fracdyn::output::kv_document;
use fracdyn::{effective_seed, CliError};
use fracdyn_maxwell_bloch::EquilibriumFamily;

#[derive(Parser)]
#[command(name = "fracdyn", version, about = "Fractional-order dynamics: simulation and stability analysis")]
struct Cli {
    /// Output format for reports printed to stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write CSV, SVG plots and a report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify an equilibrium with the eigenvalue argument test.
    Stability {
        #[arg(long)]
        system: String,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        point: PointArgs,
        /// Feedback gains; selects the controlled system.
        #[arg(long, allow_hyphen_values = true)]
        gains: Option<String>,
    },
    /// Evaluate the gain conditions at an equilibrium of the controlled model.
    GainsCheck {
        /// Five gains, comma separated; fractions such as 1/4 are kept exact.
        #[arg(long, allow_hyphen_values = true)]
        gains: String,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Empirical order of accuracy against an exact solution.
    Convergence {
        #[arg(long, default_value = "linear-decay")]
        system: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        x0: String,
        /// Step sizes, comma separated.
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
    },
    /// Run several configurations concurrently.
    Sweep {
        #[arg(long, num_args = 1.., required = true)]
        config: Vec<PathBuf>,
        /// Base directory; each run writes to a subdirectory named after its config file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PointArgs {
    /// E₁ point `m,n`.
    #[arg(long, allow_hyphen_values = true)]
    e1: Option<String>,
    /// E₂ point with fifth coordinate m.
    #[arg(long, allow_hyphen_values = true)]
    e2: Option<String>,
    /// Explicit point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FamilyArgs {
    #[arg(long, allow_hyphen_values = true)]
    e1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e2: Option<String>,
}

fn config_err(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

fn parse_e1(s: &str) -> Result<EquilibriumFamily, CliError> {
    match parse_f64_list(s).map_err(config_err)?.as_slice() {
        [m, n] => Ok(EquilibriumFamily::E1 { m: *m, n: *n }),
        _ => Err(CliError::Config(format!("--e1 expects `m,n`, got `{s}`"))),
    }
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn emit(format: Format, kv: &[(String, String)], text: &str) {
    match format {
        Format::Kv => print!("{}", kv_document(kv)),
        Format::Text => print!("{text}"),
    }
}

fn simulation_summary(o: &commands::SimulationOutcome) -> String {
    let mut s = String::new();
    for (k, v) in &o.report {
        s.push_str(&format!("{k}: {v}\n"));
    }
    if let Some(dec) = o.decreasing_tail(100) {
        s.push_str(&format!("distance decreasing over last 100 steps: {dec}\n"));
    }
    for f in &o.files {
        s.push_str(&format!("wrote {}\n", f.display()));
    }
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, output, seed } => {
            let mut cfg = load(&config)?;
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            cfg.seed = effective_seed(seed.unwrap_or(cfg.seed))?;
            let o = commands::simulate(&cfg)?;
            let mut kv = o.report.clone();
            if let Some(dec) = o.decreasing_tail(100) {
                kv.push(("distance_decreasing_last_100".into(), dec.to_string()));
            }
            emit(cli.format, &kv, &simulation_summary(&o));
        }
        Command::Stability { system, alpha, point, gains } => {
            let spec = if let Some(s) = point.e1 {
                PointSpec::Family(parse_e1(&s)?)
            } else if let Some(s) = point.e2 {
                PointSpec::Family(EquilibriumFamily::E2 { m: parse_real(&s).map_err(config_err)?.value })
            } else {
                PointSpec::Explicit(parse_f64_list(point.point.as_deref().unwrap_or_default()).map_err(config_err)?)
            };
            let gains = gains.map(|g| parse_f64_list(&g)).transpose().map_err(config_err)?;
            let report = commands::stability(&system, alpha, &spec, gains.as_deref())?;
            emit(cli.format, &report.to_kv(), &report.to_text());
        }
        Command::GainsCheck { gains, alpha, family } => {
            let gains = parse_list(&gains).map_err(config_err)?;
            let (target, m_exact) = match (family.e1, family.e2) {
                (Some(s), _) => (parse_e1(&s)?, None),
                (None, Some(s)) => {
                    let m = parse_real(&s).map_err(config_err)?;
                    (EquilibriumFamily::E2 { m: m.value }, Some(m))
                }
                (None, None) => unreachable!("clap enforces the group"),
            };
            let o = commands::gains_check(&gains, &target, m_exact, alpha)?;
            emit(cli.format, &o.kv, &o.text);
        }
        Command::Convergence { system, alpha, x0, h, tau } => {
            let x0 = parse_f64_list(&x0).map_err(config_err)?;
            let hs = parse_f64_list(&h).map_err(config_err)?;
            let r = commands::convergence(&system, alpha, &x0, tau, &hs)?;
            emit(cli.format, &commands::convergence_kv(&r), &commands::convergence_text(&r));
        }
        Command::Sweep { config, output } => {
            let mut cfgs = Vec::with_capacity(config.len());
            for path in &config {
                let mut cfg = load(path)?;
                if let Some(base) = &output {
                    let stem = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
                    cfg.output_dir = base.join(stem);
                }
                cfg.seed = effective_seed(cfg.seed)?;
                cfgs.push(cfg);
            }
            let mut first_err = None;
            let mut kv = Vec::new();
            let mut text = String::new();
            for (i, (path, result)) in config.iter().zip(commands::sweep(&cfgs)?).enumerate() {
                match result {
                    Ok(o) => {
                        for (k, v) in &o.report {
                            kv.push((format!("run.{}.{k}", i + 1), v.clone()));
                        }
                        text.push_str(&format!("== {} ==\n{}", path.display(), simulation_summary(&o)));
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        kv.push((format!("run.{}.error", i + 1), e.to_string()));
                        first_err.get_or_insert(e);
                    }
                }
            }
            emit(cli.format, &kv, &text);
            if let Some(e) = first_err {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
