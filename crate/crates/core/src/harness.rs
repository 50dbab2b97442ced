//! Disorder ensembles, residual-energy statistics and the spectral study.
//!
//! Field samples are drawn with `ChaCha8Rng::seed_from_u64(seed)`, one
//! `gen::<bool>()` per site in row-major order (`true` is `h = +1`), and
//! sample `k` of an experiment uses `seed = base_seed + k`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe_qa::{anneal, ClusterSolver, SweepOptions, SweepOrder, UpdateScope};
use crate::bethe_sa::{anneal_thermal, default_initial_temperature, ThermalSchedule};
use crate::error::{Error, Result};
use crate::exact_gs::min_cut_ground_state;
use crate::model::{generate_instance, Instance, Schedule, Scheme};
use crate::spectral::{driver_comparison, CharTimeReport, TraceOptions};

/// Residuals below this are treated as a bug, not as rounding.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Header of `records.csv`.
pub const RECORD_HEADER: &str = "scheme,J,tau,seed,final_energy,exact_energy,residual_total,residual_per_site";

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One ensemble experiment, usually read from a TOML section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `[width, height]`
    pub lattice: (usize, usize),
    #[serde(rename = "J_values")]
    pub j_values: Vec<f64>,
    pub tau_values: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    /// Initial temperature of SA; `2 (4J + max|h|)` when absent.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// `"raster"` or `"random"`.
    #[serde(default = "default_order")]
    pub sweep_order: String,
    /// `"cluster"` or `"center"`.
    #[serde(default = "default_scope")]
    pub update_scope: String,
}

fn default_order() -> String {
    "raster".into()
}

fn default_scope() -> String {
    "cluster".into()
}

impl ExperimentConfig {
    /// 20 x 20, 40 samples, all four couplings.
    pub fn desk_scale() -> Self {
        Self {
            lattice: (20, 20),
            j_values: vec![2.0, 1.5, 1.0, 0.6],
            tau_values: vec![1.0, 10.0, 100.0],
            samples: 40,
            base_seed: 0,
            schemes: default_schemes(),
            t0: None,
            output_dir: PathBuf::from("out/desk"),
            sweep_order: default_order(),
            update_scope: default_scope(),
        }
    }

    /// 100 x 100, 80 samples.
    pub fn paper_scale() -> Self {
        Self {
            lattice: (100, 100),
            samples: 80,
            tau_values: vec![1.0, 3.0, 10.0, 30.0, 100.0],
            output_dir: PathBuf::from("out/paper"),
            ..Self::desk_scale()
        }
    }

    pub fn site_count(&self) -> usize {
        self.lattice.0 * self.lattice.1
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.samples as u64).map(move |k| self.base_seed.wrapping_add(k))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lattice.0 == 0 || self.lattice.1 == 0 {
            return bad(format!("lattice {:?} is empty", self.lattice));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.j_values.is_empty() || self.tau_values.is_empty() || self.schemes.is_empty() {
            return bad("J_values, tau_values and schemes must be nonempty".into());
        }
        if let Some(j) = self.j_values.iter().find(|j| !(j.is_finite() && **j > 0.0)) {
            return bad(format!("coupling {j} is not a positive number"));
        }
        if let Some(t) = self.tau_values.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("tau {t} is not positive"));
        }
        if let Some(t0) = self.t0.filter(|t| !(t.is_finite() && *t > 0.0)) {
            return bad(format!("t0 {t0} is not positive"));
        }
        self.sweep_options().map(|_| ())
    }

    pub fn sweep_options(&self) -> Result<SweepOptions> {
        let order = match self.sweep_order.as_str() {
            "raster" => SweepOrder::Raster,
            "random" => SweepOrder::Random(self.base_seed),
            other => return Err(Error::Config(format!("unknown sweep_order '{other}'"))),
        };
        let scope = match self.update_scope.as_str() {
            "cluster" => UpdateScope::Cluster,
            "center" => UpdateScope::Center,
            other => return Err(Error::Config(format!("unknown update_scope '{other}'"))),
        };
        Ok(SweepOptions {
            order,
            scope,
            solver: ClusterSolver::default(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A config file: one TOML table per named experiment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, ExperimentConfig>> {
    let raw: BTreeMap<String, toml::Value> = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if raw.is_empty() {
        return Err(Error::Config("no experiment sections found".into()));
    }
    raw.into_iter()
        .map(|(name, value)| {
            let cfg: ExperimentConfig = value
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("[{name}]: {e}")))?;
            cfg.validate().map_err(|e| Error::Config(format!("[{name}]: {e}")))?;
            Ok((name, cfg))
        })
        .collect()
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, ExperimentConfig>> {
    parse_config_file(&fs::read_to_string(path)?)
}

/// Outcome of one (scheme, tau) run on one disorder sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scheme: Scheme,
    #[serde(rename = "J")]
    pub j: f64,
    pub tau: f64,
    pub seed: u64,
    pub final_energy: f64,
    pub exact_energy: f64,
    /// `final_energy - exact_energy`
    pub residual_total: f64,
    pub residual_per_site: f64,
}

impl RunRecord {
    fn sort_key(&self) -> (f64, u64, Scheme, f64) {
        (self.j, self.seed, self.scheme, self.tau)
    }
}

fn compare_records(a: &RunRecord, b: &RunRecord) -> std::cmp::Ordering {
    let (ka, kb) = (a.sort_key(), b.sort_key());
    ka.0.total_cmp(&kb.0)
        .then(ka.1.cmp(&kb.1))
        .then(ka.2.cmp(&kb.2))
        .then(ka.3.total_cmp(&kb.3))
}

/// Runs one scheme on one instance whose exact ground-state energy is known.
pub fn run_instance(
    instance: &Instance<f64>,
    exact_energy: f64,
    scheme: Scheme,
    tau: f64,
    t0: Option<f64>,
    opts: &SweepOptions,
) -> Result<RunRecord> {
    let tag = |source: Error| Error::Run {
        coupling: instance.coupling(),
        seed: instance.seed(),
        scheme: scheme.tag().to_string(),
        tau,
        source: Box::new(source),
    };
    let result = match scheme.kinetic() {
        Some(kind) => anneal(instance, kind, &Schedule::from_tau(tau).map_err(tag)?, opts),
        None => {
            let t0 = t0.unwrap_or_else(|| default_initial_temperature(instance));
            anneal_thermal(instance, &ThermalSchedule::from_tau(t0, tau).map_err(tag)?, opts)
        }
    };
    let residual_total = result.final_energy - exact_energy;
    if residual_total < -RESIDUAL_TOLERANCE {
        return Err(tag(Error::Invariant(format!(
            "final energy {} lies below the exact ground state {exact_energy}",
            result.final_energy
        ))));
    }
    Ok(RunRecord {
        scheme,
        j: instance.coupling(),
        tau,
        seed: instance.seed(),
        final_energy: result.final_energy,
        exact_energy,
        residual_total,
        residual_per_site: residual_total / instance.site_count() as f64,
    })
}

/// Every (J, sample, scheme, tau) run of `config`, sorted by that key.
///
/// Each disorder sample is generated and solved exactly once. If any run
/// fails, the records that did complete are written to
/// `output_dir/records.partial.csv` and the first error is returned.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let opts = config.sweep_options()?;
    let (w, h) = config.lattice;
    let samples: Vec<(f64, u64)> = config
        .j_values
        .iter()
        .flat_map(|&j| config.seeds().map(move |seed| (j, seed)))
        .collect();
    let solved: Vec<Result<(Instance<f64>, f64)>> = samples
        .par_iter()
        .map(|&(j, seed)| {
            let instance = generate_instance(w, h, j, seed)?;
            let exact = min_cut_ground_state(&instance)?.energy;
            Ok((instance, exact))
        })
        .collect();
    let solved: Vec<(Instance<f64>, f64)> = solved.into_iter().collect::<Result<_>>()?;

    let jobs: Vec<(usize, Scheme, f64)> = (0..solved.len())
        .flat_map(|i| {
            config
                .schemes
                .iter()
                .flat_map(move |&s| config.tau_values.iter().map(move |&tau| (i, s, tau)))
        })
        .collect();
    let outcomes: Vec<Result<RunRecord>> = jobs
        .par_iter()
        .map(|&(i, scheme, tau)| {
            let (instance, exact) = &solved[i];
            run_instance(instance, *exact, scheme, tau, config.t0, &opts)
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    records.sort_by(compare_records);
    if let Some(e) = first_error {
        fs::create_dir_all(&config.output_dir)?;
        write_records(config.output_dir.join("records.partial.csv"), &records)?;
        return Err(e);
    }
    Ok(records)
}

/// Runs the ensemble and writes `output_dir/records.csv`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let records = run_ensemble(config)?;
    fs::create_dir_all(&config.output_dir)?;
    write_records(config.output_dir.join("records.csv"), &records)?;
    Ok(records)
}

pub fn write_records_to<W: io::Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(RECORD_HEADER.split(','))?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    write_records_to(fs::File::create(path)?, records)
}

pub fn read_records_from<R: io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RECORD_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{RECORD_HEADER}'"),
        });
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_records_from(fs::File::open(path)?)
}

/// Mean and standard error of a sample (`n - 1` in the variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, std_err: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_err = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Self { n, mean, std_err }
    }

    /// `(self.mean - other.mean) / sqrt(se_a^2 + se_b^2)`
    pub fn separation(&self, other: &SampleStats) -> f64 {
        (self.mean - other.mean) / self.std_err.hypot(other.std_err)
    }
}

fn selects(r: &RunRecord, scheme: Scheme, j: f64, tau: f64) -> bool {
    r.scheme == scheme && r.j == j && r.tau == tau
}

/// Per-site residual statistics of one (scheme, J, tau) cell.
pub fn residual_stats(records: &[RunRecord], scheme: Scheme, j: f64, tau: f64) -> SampleStats {
    let v: Vec<f64> = records
        .iter()
        .filter(|r| selects(r, scheme, j, tau))
        .map(|r| r.residual_per_site)
        .collect();
    SampleStats::of(&v)
}

/// One row of the summary table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub scheme: Scheme,
    pub j: f64,
    pub tau: f64,
    pub stats: SampleStats,
}

/// Residual statistics for every (scheme, J, tau) present in `records`.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<(Scheme, f64, f64)> = records.iter().map(|r| (r.scheme, r.j, r.tau)).collect();
    cells.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)).then(a.2.total_cmp(&b.2)));
    cells.dedup();
    cells
        .into_iter()
        .map(|(scheme, j, tau)| CellSummary {
            scheme,
            j,
            tau,
            stats: residual_stats(records, scheme, j, tau),
        })
        .collect()
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from("scheme,J,tau,n,mean_residual_per_site,std_err\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.scheme, c.j, c.tau, c.stats.n, c.stats.mean, c.stats.std_err
        ));
    }
    out
}

/// Uniform bins over `[0, max]`. Bin `k` covers `(lo, hi]`, except that
/// the first bin also takes everything at or below zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Histogram {
    pub fn counts(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.count).collect()
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
        }
        out
    }
}

/// Histogram of raw values; see [`Histogram`] for the bin convention.
pub fn histogram_of(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Argument("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Ok(Histogram { bins: vec![] });
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = if width > 0.0 && v > 0.0 {
            ((v / width).ceil() as usize).clamp(1, bins) - 1
        } else {
            0
        };
        counts[k] += 1;
    }
    let edge = |k: usize| if k == bins { max } else { width * k as f64 };
    Ok(Histogram {
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin {
                lo: edge(k),
                hi: edge(k + 1),
                count,
            })
            .collect(),
    })
}

/// Histogram of `residual_per_site` for one (scheme, J, tau) cell.
pub fn histogram(records: &[RunRecord], scheme: Scheme, j: f64, tau: f64, bins: usize) -> Result<Histogram> {
    let v: Vec<f64> = records
        .iter()
        .filter(|r| selects(r, scheme, j, tau))
        .map(|r| r.residual_per_site)
        .collect();
    histogram_of(&v, bins)
}

/// Characteristic times of both drivers on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRow {
    pub seed: u64,
    pub j: f64,
    pub tf: CharTimeReport<f64>,
    pub fi: CharTimeReport<f64>,
}

impl SpectralRow {
    /// `tau_c(FI) / tau_c(TF)` with separately taken extrema.
    pub fn ratio(&self) -> f64 {
        self.fi.tau_c_paper / self.tf.tau_c_paper
    }

    pub fn ratio_pointwise(&self) -> f64 {
        self.fi.tau_c_pointwise / self.tf.tau_c_pointwise
    }
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let x = p * (v.len() - 1) as f64;
            let (i, frac) = (x.floor() as usize, x.fract());
            if i + 1 < v.len() {
                v[i] + frac * (v[i + 1] - v[i])
            } else {
                v[i]
            }
        };
        Some(Self {
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStudy {
    pub rows: Vec<SpectralRow>,
}

impl SpectralStudy {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(SpectralRow::ratio).collect()
    }

    pub fn summary(&self) -> Option<Quartiles> {
        Quartiles::of(&self.ratios())
    }

    /// Fraction of instances on which FI has the shorter characteristic time.
    pub fn fraction_fi_faster(&self) -> f64 {
        let n = self.rows.len().max(1) as f64;
        self.rows.iter().filter(|r| r.ratio() < 1.0).count() as f64 / n
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,J,eps_min_tf,m_max_tf,tau_c_tf,tau_c_pointwise_tf,eps_min_fi,m_max_fi,tau_c_fi,tau_c_pointwise_fi,ratio\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.seed,
                r.j,
                r.tf.eps_min,
                r.tf.m_max,
                r.tf.tau_c_paper,
                r.tf.tau_c_pointwise,
                r.fi.eps_min,
                r.fi.m_max,
                r.fi.tau_c_paper,
                r.fi.tau_c_pointwise,
                r.ratio()
            ));
        }
        out
    }
}

/// Both drivers' characteristic times on every instance, computed in parallel.
pub fn spectral_study(instances: &[Instance<f64>], grid: &[f64], opts: &TraceOptions) -> Result<SpectralStudy> {
    let rows: Vec<Result<SpectralRow>> = instances
        .par_iter()
        .map(|inst| {
            let (tf, fi) = driver_comparison(inst, grid, opts)?;
            Ok(SpectralRow {
                seed: inst.seed(),
                j: inst.coupling(),
                tf,
                fi,
            })
        })
        .collect();
    Ok(SpectralStudy {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}
