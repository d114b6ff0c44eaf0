use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hexarotor::analysis::{export_wrench_sets, DesignComparison, ForceMeasure};
use hexarotor::config::Config;
use hexarotor::optimize::{optimize_tilt, sweep_scale, sweep_weight};
use hexarotor::report;
use hexarotor::sim::{run, RunStatus};
use hexarotor::Error;

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_NON_FINITE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DEGENERATE: u8 = 65;
const EXIT_IO: u8 = 74;

/// Tilted-rotor hexarotor design, analysis and closed-loop simulation.
#[derive(Parser, Debug)]
#[command(name = "hexarotor", version)]
struct Cli {
    /// TOML configuration file; built-in defaults are used when absent.
    #[arg(long, global = true, env = "HEXAROTOR_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Measure {
    Inscribed,
    Unnormalized,
}

impl From<Measure> for ForceMeasure {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Inscribed => ForceMeasure::InscribedRadius,
            Measure::Unnormalized => ForceMeasure::UnnormalizedPairSum,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    Weight,
    Scale,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize the tilt angles for a force/torque weighting.
    Optimize {
        /// Force weight c_F in [0, 1].
        #[arg(long = "c-f")]
        c_f: Option<f64>,
        /// Grid spacing in degrees.
        #[arg(long = "grid-deg")]
        grid_deg: Option<f64>,
        /// Refine the best grid cell with Nelder–Mead.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        refine: Option<bool>,
        #[arg(long = "force-measure", value_enum)]
        force_measure: Option<Measure>,
        /// Write the objective surface to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the force and torque sets of the configured layout.
    WrenchSets {
        /// Directory receiving force_set.csv and torque_set.csv.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
        /// Instead, compare the force-only, torque-only and balanced optima.
        #[arg(long = "table-ii")]
        table_ii: bool,
        #[arg(long = "force-measure", value_enum)]
        force_measure: Option<Measure>,
    },
    /// Run the closed-loop tracking scenario.
    Simulate {
        /// Write the simulation log to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drop all configured disturbances.
        #[arg(long = "no-disturbance")]
        no_disturbance: bool,
    },
    /// Optimal designs over a range of weights or of vehicle scales.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Force weights for the weight sweep.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Arm lengths for the scale sweep.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
        /// Drag-to-thrust ratios for the scale sweep.
        #[arg(long = "drag-ratios", value_delimiter = ',')]
        drag_ratios: Option<Vec<f64>>,
        /// Force weight for the scale sweep.
        #[arg(long = "c-f")]
        c_f: Option<f64>,
        #[arg(long = "force-measure", value_enum)]
        force_measure: Option<Measure>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Degenerate(String),
    NonFinite(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Degenerate(_) => EXIT_DEGENERATE,
            Failure::NonFinite(_) => EXIT_NON_FINITE,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Degenerate(m) | Failure::NonFinite(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::DegenerateDesign(_) | Error::SingularAllocation { .. } => Failure::Degenerate(message),
            Error::NonFiniteState { .. } => Failure::NonFinite(message),
            _ => Failure::Usage(message),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when no path is given.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

fn check_weight(c_f: f64) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&c_f) {
        Ok(c_f)
    } else {
        Err(Failure::Usage(format!("--c-f must be within [0, 1], got {c_f}")))
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    let mut config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Optimize { c_f, grid_deg, refine, force_measure, out } => {
            if let Some(c) = c_f {
                config.optimizer.c_f = check_weight(c)?;
            }
            if let Some(g) = grid_deg {
                if !(g > 0.0 && g <= 90.0) {
                    return Err(Failure::Usage(format!("--grid-deg must be in (0, 90], got {g}")));
                }
                config.optimizer.grid_step_deg = g;
            }
            if let Some(r) = refine {
                config.optimizer.refine = r;
            }
            if let Some(m) = force_measure {
                config.optimizer.force_measure = m.into();
            }
            let template = config.layout()?;
            let optimum = optimize_tilt(config.optimizer.c_f, &template, &config.optimizer_settings())?;
            let d = &optimum.design;
            println!(
                "alpha_deg={:.4} beta_deg={:.4} f_min={:.6} t_min={:.6} zeta={:.6} plateau={} force_measure={}",
                d.alpha_deg(),
                d.beta_deg(),
                d.metrics.f_min,
                d.metrics.t_min,
                d.objective,
                optimum.plateau,
                config.optimizer.force_measure.name()
            );
            println!(
                "f_min_per_thrust={:.6} t_min_per_thrust_length={:.6}",
                d.metrics.f_min / template.max_thrust(),
                d.metrics.t_min / (template.max_thrust() * template.arm_length())
            );
            if let Some(path) = out {
                let digest = config.digest();
                with_output(Some(&path), |w| report::write_grid(w, &digest, &optimum.grid))?;
            }
            Ok(0)
        }
        Command::WrenchSets { out_dir, table_ii, force_measure } => {
            if let Some(m) = force_measure {
                config.optimizer.force_measure = m.into();
            }
            if table_ii {
                return table_two(&config);
            }
            let layout = config.layout()?;
            let dump = export_wrench_sets(&layout)?;
            println!(
                "alpha_deg={:.4} beta_deg={:.4} f_min={:.6} t_min={:.6}",
                layout.alpha().to_degrees(),
                layout.beta().to_degrees(),
                dump.metrics.f_min,
                dump.metrics.t_min
            );
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
                let digest = config.digest();
                with_output(Some(&dir.join("force_set.csv")), |w| report::write_wrench_set(w, &digest, &dump, true))?;
                with_output(Some(&dir.join("torque_set.csv")), |w| report::write_wrench_set(w, &digest, &dump, false))?;
            }
            Ok(0)
        }
        Command::Simulate { out, no_disturbance } => {
            if no_disturbance {
                config.scenario.disturbances.clear();
            }
            let scenario = config.scenario()?;
            let log = run(&scenario)?;
            if let Some(path) = out {
                let digest = config.digest();
                with_output(Some(&path), |w| report::write_sim_log(w, &digest, &log))?;
            }
            let converged = log.status == RunStatus::Converged;
            println!(
                "status={} final_phi={:e} peak_thrust={:.6} saturation_count={}",
                if converged { "converged" } else { "not-converged" },
                log.final_phi(),
                log.peak_thrust,
                log.saturation_count
            );
            Ok(if converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Sweep { kind, weights, lengths, drag_ratios, c_f, force_measure, out } => {
            if let Some(m) = force_measure {
                config.optimizer.force_measure = m.into();
            }
            let template = config.layout()?;
            let settings = config.optimizer_settings();
            let digest = config.digest();
            match kind {
                SweepKind::Weight => {
                    let weights = weights.unwrap_or_else(|| (0..=20).map(|k| k as f64 / 20.0).collect());
                    for &c in &weights {
                        check_weight(c)?;
                    }
                    let rows = sweep_weight(&weights, &template, &settings)?;
                    with_output(out.as_deref(), |w| report::write_weight_sweep(w, &digest, &rows))?;
                }
                SweepKind::Scale => {
                    let lengths = lengths.unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 5.0, 10.0]);
                    let ratios = drag_ratios.unwrap_or_else(|| vec![0.0, 0.01, 0.02, 0.05]);
                    if let Some(l) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                        return Err(Failure::Usage(format!("arm lengths must be positive, got {l}")));
                    }
                    if let Some(g) = ratios.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                        return Err(Failure::Usage(format!("drag ratios must be non-negative, got {g}")));
                    }
                    let c = check_weight(c_f.unwrap_or(config.optimizer.c_f))?;
                    let rows = sweep_scale(&lengths, &ratios, c, &template, &settings)?;
                    with_output(out.as_deref(), |w| report::write_scale_sweep(w, &digest, &rows))?;
                }
            }
            Ok(0)
        }
    }
}

fn table_two(config: &Config) -> Result<u8, Failure> {
    let template = config.layout()?;
    let settings = config.optimizer_settings();
    let force_only = optimize_tilt(1.0, &template, &settings)?.design;
    let torque_only = optimize_tilt(0.0, &template, &settings)?.design;
    let balanced = optimize_tilt(0.5, &template, &settings)?.design;
    let c = DesignComparison::new(&force_only.metrics, &torque_only.metrics, &balanced.metrics);
    println!("force_measure={}", config.optimizer.force_measure.name());
    for (name, (df, dt)) in [
        ("case1_vs_case2", c.force_only_vs_torque_only),
        ("case2_vs_case1", c.torque_only_vs_force_only),
        ("case3_vs_case1", c.balanced_vs_force_only),
        ("case3_vs_case2", c.balanced_vs_torque_only),
    ] {
        println!("{name} f_min_change_pct={df:+.2} t_min_change_pct={dt:+.2}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
