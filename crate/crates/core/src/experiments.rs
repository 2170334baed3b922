//! Simulation harness: random instances, the recovery-SNR metric, paired
//! `λ` grid search, and (method × m × K × L/m) sweeps persisted to CSV.
//!
//! Every random quantity is a function of the sweep's master seed and the
//! identity of what it belongs to. Instances depend on `(snr, m, trial)`
//! and index sets on `(snr, m, trial)` plus the subset number, so within a
//! trial every method and every `λ` sees the same `A`, `x*`, `z` and draws.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Method, PreparedRecovery, SensingProblem};
use crate::linalg::{self, DenseMatrix, DenseVector, DEFAULT_SUPPORT_TOL};
use crate::sampling::{generate_subsets, SamplingPlan, Scheme};
use crate::solver::{SolverConfig, WarmStart};

/// Recovery SNR reported for an exact reconstruction.
pub const RSNR_CAP_DB: f64 = 300.0;

/// CSV header written by [`run_sweep`].
pub const CSV_HEADER: &str =
    "method,m,n,s,snr_db,K,L,ratio,lambda,trial,rsnr_db,rsnr_literal_db,iterations,converged,wall_ms";

/// How the noise variance is tied to the requested SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseCalibration {
    /// `σ² = 10^(−SNR/10) ‖Ax*‖² / m`, so `E‖z‖² = 10^(−SNR/10) ‖Ax*‖²`.
    #[default]
    PerMeasurement,
    /// `σ² = 10^(−SNR/10) ‖Ax*‖²` with no division by `m`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    /// Measurement SNR in dB; `f64::INFINITY` requests noiseless data.
    pub snr_db: f64,
    pub seed: u64,
    pub noise: NoiseCalibration,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Parameter("m and n must be at least 1".into()));
        }
        if self.s > self.n {
            return Err(Error::Parameter(format!("s={} exceeds n={}", self.s, self.n)));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Parameter(format!("snr_db={} is not usable", self.snr_db)));
        }
        Ok(())
    }
}

/// One draw of the measurement model `y = A x* + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DenseMatrix,
    pub x_star: DenseVector,
    pub z: DenseVector,
    pub y: DenseVector,
}

impl Instance {
    pub fn problem(&self) -> Result<SensingProblem> {
        SensingProblem::new(self.a.clone(), self.y.clone())
    }
}

/// Gaussian `A`, an `s`-sparse Gaussian `x*` on a uniformly random support,
/// and white Gaussian noise at the requested SNR.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let a_data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let a = DenseMatrix::from_row_major(m, n, a_data)?;

    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..spec.s {
        let pick = rng.random_range(i..n);
        pool.swap(i, pick);
    }
    let mut x = vec![0.0; n];
    for &i in &pool[..spec.s] {
        x[i] = rng.sample(StandardNormal);
    }

    let ax = a.matvec(&x);
    let z: Vec<f64> = if spec.snr_db == f64::INFINITY {
        vec![0.0; m]
    } else {
        let signal: f64 = ax.iter().map(|v| v * v).sum();
        let mut variance = 10f64.powf(-spec.snr_db / 10.0) * signal;
        if spec.noise == NoiseCalibration::PerMeasurement {
            variance /= m as f64;
        }
        let sigma = variance.sqrt();
        (0..m)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let y: Vec<f64> = ax.iter().zip(&z).map(|(s, e)| s + e).collect();
    Ok(Instance {
        a,
        x_star: DenseVector::new(x)?,
        z: DenseVector::new(z)?,
        y: DenseVector::new(y)?,
    })
}

/// `10·log10(‖x*‖² / ‖x̂ − x*‖²)` in dB (higher is better), capped at [`RSNR_CAP_DB`].
pub fn recovery_snr(x_hat: &[f64], x_star: &[f64]) -> Result<f64> {
    if x_hat.len() != x_star.len() {
        return Err(Error::Dimension(format!(
            "estimate has {} entries, truth has {}",
            x_hat.len(),
            x_star.len()
        )));
    }
    let signal: f64 = x_star.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::Domain("recovery SNR is undefined for x* = 0".into()));
    }
    let err: f64 = x_hat
        .iter()
        .zip(x_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if err == 0.0 {
        return Ok(RSNR_CAP_DB);
    }
    Ok((10.0 * (signal / err).log10()).min(RSNR_CAP_DB))
}

/// The error-over-signal form `10·log10(‖x̂ − x*‖² / ‖x*‖²)`, the negation of [`recovery_snr`].
pub fn recovery_snr_literal(x_hat: &[f64], x_star: &[f64]) -> Result<f64> {
    recovery_snr(x_hat, x_star).map(|v| -v)
}

/// `count` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && count >= 1) {
        return Err(Error::Parameter(format!(
            "log grid needs 0 < min <= max and count >= 1 (got {min}, {max}, {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                min
            } else if i == count - 1 {
                max
            } else {
                (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// SplitMix64 over a sequence of words.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        state ^= p;
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        state = z ^ (z >> 31);
    }
    state
}

/// One (method, m, K, L) configuration of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub snr_db: f64,
    pub k: usize,
    pub l: usize,
    pub scheme: Scheme,
    pub noise: NoiseCalibration,
}

impl Cell {
    pub fn ratio(&self) -> f64 {
        self.l as f64 / self.m as f64
    }
}

/// Seeds for one trial: the instance draw and the index-set draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub instance: u64,
    pub subsets: u64,
}

impl TrialSeeds {
    /// Seeds shared by every method and `λ` for `(snr, m, trial)`.
    pub fn derive(master_seed: u64, snr_db: f64, m: usize, trial: usize) -> Self {
        let base = [master_seed, snr_db.to_bits(), m as u64, trial as u64];
        Self {
            instance: derive_seed(&[base[0], base[1], base[2], base[3], 1]),
            subsets: derive_seed(&[base[0], base[1], base[2], base[3], 2]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    True,
    False,
    Diverged,
}

/// Outcome of one recovery at one `λ` on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rsnr_db: f64,
    pub rsnr_literal_db: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub wall_ms: u64,
}

/// Solver and harness knobs shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub solver: SolverConfig,
    /// Bolasso support threshold.
    pub support_tol: f64,
    /// Warm-start each `λ` from the next larger one.
    pub warm_start: bool,
    pub record_wall_time: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            support_tol: DEFAULT_SUPPORT_TOL,
            warm_start: true,
            record_wall_time: false,
        }
    }
}

/// Runs `cell.method` on one trial for every `λ` of `grid`, returned in grid order.
///
/// With warm starts the grid is walked from the largest `λ` down.
pub fn evaluate_trial(
    cell: &Cell,
    grid: &[f64],
    seeds: TrialSeeds,
    opts: &SearchOptions,
) -> Result<Vec<TrialOutcome>> {
    let instance = generate_instance(&InstanceSpec {
        m: cell.m,
        n: cell.n,
        s: cell.s,
        snr_db: cell.snr_db,
        seed: seeds.instance,
        noise: cell.noise,
    })?;
    let problem = instance.problem()?;
    let subsets = if cell.method.is_ensemble() {
        generate_subsets(&SamplingPlan {
            m: cell.m,
            subset_size: cell.l,
            count: cell.k,
            scheme: cell.scheme,
            master_seed: seeds.subsets,
        })?
    } else {
        Vec::new()
    };
    let prepared = PreparedRecovery::new(cell.method, &problem, &subsets, opts.solver.rho)?
        .with_support_tol(opts.support_tol)?;

    let mut out = vec![None; grid.len()];
    let mut warm: Option<Vec<WarmStart>> = None;
    for idx in (0..grid.len()).rev() {
        if idx + 1 < grid.len() && grid[idx] == grid[idx + 1] {
            out[idx] = out[idx + 1];
            continue;
        }
        let cfg = opts.solver.with_lambda(grid[idx]);
        let started = Instant::now();
        let result = prepared.recover(&cfg, if opts.warm_start { warm.as_deref() } else { None });
        let wall_ms = if opts.record_wall_time {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        out[idx] = Some(match result {
            Ok(res) => {
                let rsnr = recovery_snr(res.x_hat.as_slice(), instance.x_star.as_slice())?;
                let outcome = TrialOutcome {
                    rsnr_db: rsnr,
                    rsnr_literal_db: -rsnr,
                    iterations: res.iterations(),
                    status: if res.converged() {
                        SolveStatus::True
                    } else {
                        SolveStatus::False
                    },
                    wall_ms,
                };
                warm = Some(res.warm_starts());
                outcome
            }
            Err(Error::Divergence(iter)) => {
                warm = None;
                TrialOutcome {
                    rsnr_db: -RSNR_CAP_DB,
                    rsnr_literal_db: RSNR_CAP_DB,
                    iterations: iter,
                    status: SolveStatus::Diverged,
                    wall_ms,
                }
            }
            Err(e) => return Err(e),
        });
    }
    Ok(out.into_iter().map(|o| o.expect("every grid point visited")).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSearch {
    pub best_lambda: f64,
    pub best_index: usize,
    pub mean_rsnr: f64,
    /// Mean RSNR for each grid entry, in grid order.
    pub grid_means: Vec<f64>,
    /// Per-trial outcomes at the selected `λ`.
    pub best_trials: Vec<TrialOutcome>,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parameter("lambda grid is empty".into()));
    }
    if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::Parameter("lambda grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("lambda grid must be ascending".into()));
    }
    Ok(())
}

/// Picks the `λ` with the largest mean RSNR over paired trials; ties go to the larger `λ`.
pub fn lambda_search(
    cell: &Cell,
    grid: &[f64],
    seeds: &[TrialSeeds],
    opts: &SearchOptions,
) -> Result<LambdaSearch> {
    validate_grid(grid)?;
    if seeds.is_empty() {
        return Err(Error::Parameter("lambda search needs at least one trial".into()));
    }
    let per_trial: Vec<Vec<TrialOutcome>> = seeds
        .par_iter()
        .map(|&s| evaluate_trial(cell, grid, s, opts))
        .collect::<Result<_>>()?;
    let grid_means: Vec<f64> = (0..grid.len())
        .map(|g| per_trial.iter().map(|t| t[g].rsnr_db).sum::<f64>() / seeds.len() as f64)
        .collect();
    let mut best_index = 0;
    for (g, &mean) in grid_means.iter().enumerate() {
        if mean >= grid_means[best_index] {
            best_index = g;
        }
    }
    Ok(LambdaSearch {
        best_lambda: grid[best_index],
        best_index,
        mean_rsnr: grid_means[best_index],
        best_trials: per_trial.iter().map(|t| t[best_index]).collect(),
        grid_means,
    })
}

/// A full sweep. Read from a flat TOML file; every key is optional.
///
/// ```toml
/// m = [50, 100]
/// n = 200
/// s = 50
/// snr_db = [0.0]
/// methods = ["jobs", "bagging", "bolasso", "l1"]
/// k = [30, 50, 100]
/// ratios = [0.1, 0.2, 0.3]
/// lambdas = [0.01, 0.1, 1.0, 10.0, 100.0]
/// trials = 20
/// scheme = "bootstrap"
/// seed = 0
/// literal_noise = false
/// warm_start = true
/// record_wall_time = false
/// support_tol = 1e-4
/// rho = 1.0
/// max_iter = 2000
/// eps_abs = 1e-6
/// eps_rel = 1e-4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub m: Vec<usize>,
    pub n: usize,
    pub s: usize,
    pub snr_db: Vec<f64>,
    pub methods: Vec<Method>,
    pub k: Vec<usize>,
    pub ratios: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub trials: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub literal_noise: bool,
    pub warm_start: bool,
    pub record_wall_time: bool,
    pub support_tol: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            m: vec![100],
            n: 200,
            s: 50,
            snr_db: vec![0.0],
            methods: Method::ALL.to_vec(),
            k: vec![30, 50, 100],
            ratios: (1..=10).map(|i| i as f64 / 10.0).collect(),
            lambdas: log_grid(0.01, 200.0, 30).expect("static grid"),
            trials: 20,
            scheme: Scheme::Bootstrap,
            seed: 0,
            literal_noise: false,
            warm_start: true,
            record_wall_time: false,
            support_tol: DEFAULT_SUPPORT_TOL,
            rho: solver.rho,
            max_iter: solver.max_iter,
            eps_abs: solver.eps_abs,
            eps_rel: solver.eps_rel,
        }
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("sweep config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            solver: SolverConfig {
                lambda: self.lambdas.first().copied().unwrap_or(1.0),
                rho: self.rho,
                max_iter: self.max_iter,
                eps_abs: self.eps_abs,
                eps_rel: self.eps_rel,
            },
            support_tol: self.support_tol,
            warm_start: self.warm_start,
            record_wall_time: self.record_wall_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("m", self.m.is_empty()),
            ("snr_db", self.snr_db.is_empty()),
            ("methods", self.methods.is_empty()),
            ("k", self.k.is_empty()),
            ("ratios", self.ratios.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::Parameter(format!("sweep field '{name}' is empty")));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::Parameter(format!("ratio {r} must lie in (0, 1]")));
        }
        if self.k.contains(&0) {
            return Err(Error::Parameter("K values must be at least 1".into()));
        }
        validate_grid(&self.lambdas)?;
        self.options().solver.validate()?;
        if !(0.0..1.0).contains(&self.support_tol) {
            return Err(Error::Parameter("support_tol must lie in [0, 1)".into()));
        }
        for &m in &self.m {
            InstanceSpec {
                m,
                n: self.n,
                s: self.s,
                snr_db: self.snr_db[0],
                seed: 0,
                noise: NoiseCalibration::default(),
            }
            .validate()?;
        }
        for snr in &self.snr_db {
            if snr.is_nan() || *snr == f64::NEG_INFINITY {
                return Err(Error::Parameter(format!("snr_db={snr} is not usable")));
            }
        }
        Ok(())
    }

    /// Cells in output order. l1 ignores `K` and `L/m` and gets one cell per (snr, m).
    pub fn cells(&self) -> Vec<Cell> {
        let noise = if self.literal_noise {
            NoiseCalibration::Literal
        } else {
            NoiseCalibration::PerMeasurement
        };
        let mut cells = Vec::new();
        for &snr_db in &self.snr_db {
            for &m in &self.m {
                for &method in &self.methods {
                    let base = Cell {
                        method,
                        m,
                        n: self.n,
                        s: self.s,
                        snr_db,
                        k: 1,
                        l: m,
                        scheme: self.scheme,
                        noise,
                    };
                    if !method.is_ensemble() {
                        cells.push(base);
                        continue;
                    }
                    for &k in &self.k {
                        for &ratio in &self.ratios {
                            cells.push(Cell {
                                k,
                                l: subset_size(ratio, m),
                                ..base
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// `L = round(ratio · m)`, at least 1.
pub fn subset_size(ratio: f64, m: usize) -> usize {
    ((ratio * m as f64).round() as usize).max(1)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub snr_db: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub ratio: f64,
    pub lambda: f64,
    pub trial: usize,
    pub rsnr_db: f64,
    pub rsnr_literal_db: f64,
    pub iterations: usize,
    pub converged: SolveStatus,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CellKey {
    method: Method,
    m: usize,
    n: usize,
    s: usize,
    snr_bits: u64,
    k: usize,
    l: usize,
}

impl CellKey {
    fn of_cell(c: &Cell) -> Self {
        Self {
            method: c.method,
            m: c.m,
            n: c.n,
            s: c.s,
            snr_bits: c.snr_db.to_bits(),
            k: c.k,
            l: c.l,
        }
    }

    fn of_record(r: &SweepRecord) -> Self {
        Self {
            method: r.method,
            m: r.m,
            n: r.n,
            s: r.s,
            snr_bits: r.snr_db.to_bits(),
            k: r.k,
            l: r.l,
        }
    }
}

/// Reads a sweep CSV written by [`run_sweep`].
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let header = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::Format(format!(
            "{} does not carry the sweep header",
            path.display()
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Format(format!("{}: {e}", path.display()))))
        .collect()
}

fn write_records(path: &Path, records: &[SweepRecord], with_header: bool) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(with_header)
        .from_writer(file);
    if with_header && records.is_empty() {
        writer
            .write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::io(path, e))?;
    }
    for r in records {
        writer.serialize(r).map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Runs every cell of `spec`, appending one row per (cell, trial) to `out_path`.
///
/// Cells already complete in an existing file are skipped; rows of partially
/// written cells are dropped and the cell is rerun. Returns the full table.
pub fn run_sweep(spec: &SweepSpec, out_path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let path = out_path.as_ref();
    let cells = spec.cells();

    let mut table = if path.exists() && fs::metadata(path).map_err(|e| Error::io(path, e))?.len() > 0 {
        read_records(path)?
    } else {
        Vec::new()
    };
    let mut counts: HashMap<CellKey, usize> = HashMap::new();
    for r in &table {
        *counts.entry(CellKey::of_record(r)).or_default() += 1;
    }
    let complete = |key: &CellKey| counts.get(key).copied() == Some(spec.trials);
    let before = table.len();
    table.retain(|r| complete(&CellKey::of_record(r)));
    if table.len() != before || table.is_empty() {
        // Rewrite without the partial cells (or start a fresh file).
        fs::write(path, "").map_err(|e| Error::io(path, e))?;
        write_records(path, &table, true)?;
    }

    let opts = spec.options();
    let seeds_for = |cell: &Cell| -> Vec<TrialSeeds> {
        (0..spec.trials)
            .map(|t| TrialSeeds::derive(spec.seed, cell.snr_db, cell.m, t))
            .collect()
    };
    for cell in &cells {
        if complete(&CellKey::of_cell(cell)) {
            continue;
        }
        let search = lambda_search(cell, &spec.lambdas, &seeds_for(cell), &opts)?;
        let rows: Vec<SweepRecord> = search
            .best_trials
            .iter()
            .enumerate()
            .map(|(trial, o)| SweepRecord {
                method: cell.method,
                m: cell.m,
                n: cell.n,
                s: cell.s,
                snr_db: cell.snr_db,
                k: cell.k,
                l: cell.l,
                ratio: cell.ratio(),
                lambda: search.best_lambda,
                trial,
                rsnr_db: o.rsnr_db,
                rsnr_literal_db: o.rsnr_literal_db,
                iterations: o.iterations,
                converged: o.status,
                wall_ms: o.wall_ms,
            })
            .collect();
        write_records(path, &rows, false)?;
        table.extend(rows);
    }
    Ok(table)
}

/// [`run_sweep`] inside a dedicated pool of `threads` workers (0 = one per core).
pub fn run_sweep_with_threads(
    spec: &SweepSpec,
    out_path: impl AsRef<Path>,
    threads: usize,
) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
    let path = out_path.as_ref();
    pool.install(|| run_sweep(spec, path))
}

/// Mean of a slice, summed in order.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `‖x‖₀` counted exactly.
pub fn nonzeros(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Support of an estimate at the default threshold.
pub fn estimate_support(x: &[f64]) -> Vec<usize> {
    linalg::vector_support(x, DEFAULT_SUPPORT_TOL)
}
