use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rfim_anneal::bethe_qa::{anneal, SweepOptions, SweepOrder, UpdateScope};
use rfim_anneal::bethe_sa::{anneal_thermal, default_initial_temperature, ThermalSchedule};
use rfim_anneal::exact_gs::{brute_force_ground_state, min_cut_ground_state};
use rfim_anneal::format::{load_instance, save_instance, write_instance};
use rfim_anneal::harness::{self, ExperimentConfig};
use rfim_anneal::spectral::{characteristic_time, spectral_trace, uniform_grid, CharTimeReport, TraceOptions};
use rfim_anneal::{generate_instance, Error, KineticKind, RfimInstance, Schedule, Scheme};

#[derive(Parser)]
#[command(name = "rfim", version, about = "Random-field Ising model annealing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tf,
    Fi,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    QaTf,
    QaFi,
    Sa,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::QaTf => Scheme::QaTf,
            SchemeArg::QaFi => Scheme::QaFi,
            SchemeArg::Sa => Scheme::Sa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Raster,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Cluster,
    Center,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Mincut,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random ±1 field sample and write an instance file.
    Generate {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long = "J")]
        coupling: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap and matrix-element trace by exact diagonalisation.
    Spectrum {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of uniform s points in [0, 1].
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Bisect around the gap minimum.
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One mean-field annealing run.
    Anneal {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        tau: f64,
        /// Initial temperature (sa only).
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, value_enum, default_value = "raster")]
        sweep_order: OrderArg,
        /// Seed of the random sweep order.
        #[arg(long, default_value_t = 0)]
        order_seed: u64,
        #[arg(long, value_enum, default_value = "cluster")]
        update_scope: ScopeArg,
    },
    /// Exact classical ground state.
    ExactGs {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "mincut")]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiments of a config file and write records.csv.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        /// Only this section of the config file.
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Residual histogram of one (scheme, J, tau) cell of a records file.
    Histogram {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long = "J")]
        coupling: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic times of both drivers over a set of random instances.
    SpectralStudy {
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 3)]
        height: usize,
        #[arg(long = "J")]
        coupling: f64,
        #[arg(long, default_value_t = 50)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<RfimInstance> {
    Ok(load_instance(path)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate { width, height, coupling, seed, out } => {
            let inst = generate_instance::<f64>(width, height, coupling, seed)?;
            match out {
                Some(path) => save_instance(&inst, path)?,
                None => print!("{}", write_instance(&inst)),
            }
        }
        Command::Spectrum { instance, kind, grid, refine, out } => {
            let inst = load(&instance)?;
            let kind = match kind {
                Kind::Tf => KineticKind::TransverseField,
                Kind::Fi => KineticKind::FerroInteraction,
            };
            let opts = TraceOptions {
                refine_to: refine.then_some(1e-3),
                ..TraceOptions::default()
            };
            let trace = spectral_trace(&inst, kind, &uniform_grid::<f64>(grid), &opts)?;
            let report = characteristic_time(&trace)?;
            if let Some(path) = out.as_deref() {
                emit(Some(path), &trace.to_csv())?;
            }
            println!("{}", CharTimeReport::<f64>::csv_header());
            println!("{}", report.csv_row());
        }
        Command::Anneal { instance, scheme, tau, t0, sweep_order, order_seed, update_scope } => {
            let inst = load(&instance)?;
            let scheme = Scheme::from(scheme);
            let opts = SweepOptions {
                order: match sweep_order {
                    OrderArg::Raster => SweepOrder::Raster,
                    OrderArg::Random => SweepOrder::Random(order_seed),
                },
                scope: match update_scope {
                    ScopeArg::Cluster => UpdateScope::Cluster,
                    ScopeArg::Center => UpdateScope::Center,
                },
                ..SweepOptions::default()
            };
            let result = match scheme.kinetic() {
                Some(kind) => anneal(&inst, kind, &Schedule::from_tau(tau)?, &opts),
                None => {
                    let t0 = t0.unwrap_or_else(|| default_initial_temperature(&inst));
                    anneal_thermal(&inst, &ThermalSchedule::from_tau(t0, tau)?, &opts)
                }
            };
            // Left empty when the instance cannot be solved exactly.
            let residual = min_cut_ground_state(&inst)
                .map(|gs| (result.final_energy - gs.energy).to_string())
                .unwrap_or_default();
            println!("scheme,tau,final_energy,residual_energy");
            println!("{},{},{},{}", scheme, tau, result.final_energy, residual);
        }
        Command::ExactGs { instance, method, out } => {
            let inst = load(&instance)?;
            let gs = match method {
                Method::Brute => brute_force_ground_state(&inst)?,
                Method::Mincut => min_cut_ground_state(&inst)?,
            };
            let spins: Vec<String> = gs.config.spins().iter().map(|s| s.to_string()).collect();
            emit(out.as_deref(), &format!("{}\n{}\n", gs.energy, spins.join(" ")))?;
        }
        Command::Ensemble { config, experiment } => {
            let mut sections = harness::load_config_file(&config)?;
            let selected: Vec<(String, ExperimentConfig)> = match experiment {
                Some(name) => {
                    let cfg = sections
                        .remove(&name)
                        .ok_or_else(|| Error::Config(format!("no experiment named '{name}'")))?;
                    vec![(name, cfg)]
                }
                None => sections.into_iter().collect(),
            };
            for (name, cfg) in selected {
                let records = harness::run_experiment(&cfg)?;
                eprintln!(
                    "[{name}] {} records -> {}",
                    records.len(),
                    cfg.output_dir.join("records.csv").display()
                );
                print!("{}", harness::summary_csv(&harness::summarize(&records)));
            }
        }
        Command::Histogram { records, scheme, coupling, tau, bins, out } => {
            let records = harness::read_records(&records)?;
            let hist = harness::histogram(&records, scheme.into(), coupling, tau, bins)?;
            emit(out.as_deref(), &hist.to_csv())?;
        }
        Command::SpectralStudy { width, height, coupling, samples, base_seed, grid, out } => {
            let instances = (0..samples)
                .map(|k| generate_instance::<f64>(width, height, coupling, base_seed.wrapping_add(k)))
                .collect::<Result<Vec<_>, _>>()?;
            let study = harness::spectral_study(&instances, &uniform_grid::<f64>(grid), &TraceOptions::default())?;
            emit(out.as_deref(), &study.to_csv())?;
            let q = study.summary().ok_or_else(|| anyhow!("no instances"))?;
            eprintln!(
                "ratio tau_c(FI)/tau_c(TF): median {} (q1 {}, q3 {}); FI faster on {:.0}% of instances",
                q.median,
                q.q1,
                q.q3,
                100.0 * study.fraction_fi_faster()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already render their sources inline.
            let (kind, message) = match e.downcast_ref::<Error>() {
                Some(err) => (err.kind(), err.to_string()),
                None => ("io", format!("{e:#}")),
            };
            eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
            ExitCode::FAILURE
        }
    }
}
