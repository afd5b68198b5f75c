//! Regularized manifold volume and complexity entropy.
//!
//! The volume integral over the positive-definite parameter region is
//! estimated by importance sampling: proposals are independent unit-mean
//! exponential coordinates, whose density `exp(-sum theta_i)` cancels the
//! `exp(-Tr C)` damping factor exactly (the adjacency contributes nothing
//! to the trace). The estimator is therefore the plain sample mean of
//! `exp(kappa) * core(theta)` over all proposals, with out-of-domain
//! proposals contributing exactly zero, and it is unbiased for the volume.
//!
//! Work is split into fixed-size chunks whose random streams derive from
//! `(seed, chunk index)`; partial sums combine in chunk order, so the
//! result is bit-identical no matter how many threads run the chunks.

use crate::fisher::CoreEvaluator;
use crate::graph::Network;
use crate::linalg::SymMatrix;
use crate::sampler::{chunk_rng, exponential_from_uniform, fill_exponential, ScrambledHalton, MAX_QMC_DIMENSIONS};
use rayon::prelude::*;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VolumeError {
    #[error("low-discrepancy sampler supports at most {max} dimensions, got {got}")]
    SamplerDimensions { max: usize, got: usize },
    #[error("calibration estimate {estimate} is not strictly positive (catastrophic undersampling)")]
    CalibrationUndersampled { estimate: f64 },
    #[error("volume estimate {0} is not positive; entropy is undefined")]
    NonPositiveVolume(f64),
}

/// Proposal sampler choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    PseudoRandom,
    LowDiscrepancy,
}

/// Logarithm base for the entropy. Base 2 reproduces the reference
/// simplex table; the natural log is available alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Base2,
    Natural,
}

impl LogBase {
    pub fn ln_of_base(self) -> f64 {
        match self {
            LogBase::Base2 => std::f64::consts::LN_2,
            LogBase::Natural => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Base2 => "2",
            LogBase::Natural => "e",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Monte Carlo configuration. `samples >= chunk_size >= 1` holds by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub sampler: SamplerKind,
}

pub const DEFAULT_CHUNK_SIZE: usize = 65_536;
const QMC_REPLICATIONS: usize = 8;

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        let samples = samples.max(1);
        McConfig {
            samples,
            seed,
            chunk_size: DEFAULT_CHUNK_SIZE.min(samples),
            sampler: SamplerKind::PseudoRandom,
        }
    }

    pub fn with_sampler(mut self, sampler: SamplerKind) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size.clamp(1, self.samples);
        self
    }
}

/// Monte Carlo volume estimate with its standard error and acceptance
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples_total: usize,
    /// Fraction of proposals with positive definite covariance.
    pub accepted_fraction: f64,
    pub kappa_used: f64,
}

/// Entropy `-log(volume)` with first-order error propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    pub entropy: f64,
    pub entropy_stderr: f64,
    pub log_base: LogBase,
}

/// Calibration record: the constant making the edgeless n-vertex volume
/// equal one, keyed by the sampling configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaRecord {
    pub n: usize,
    pub kappa: f64,
    pub kappa_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct ChunkSums {
    sum: f64,
    sum_sq: f64,
    accepted: u64,
    count: u64,
}

impl ChunkSums {
    fn merge(mut self, other: ChunkSums) -> ChunkSums {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.accepted += other.accepted;
        self.count += other.count;
        self
    }
}

fn run_pseudo_chunk(net: &Network, seed: u64, chunk_index: u64, count: usize) -> ChunkSums {
    let mut rng = chunk_rng(seed, chunk_index);
    let mut eval = CoreEvaluator::new(net);
    let mut theta = vec![0.0f64; net.n()];
    let mut sums = ChunkSums::default();
    for _ in 0..count {
        fill_exponential(&mut rng, &mut theta);
        let core = eval.eval(&theta);
        sums.sum += core.value;
        sums.sum_sq += core.value * core.value;
        sums.accepted += core.in_domain as u64;
        sums.count += 1;
    }
    sums
}

fn run_qmc_chunk(net: &Network, halton: &ScrambledHalton, start: u64, count: usize) -> ChunkSums {
    let mut eval = CoreEvaluator::new(net);
    let mut point = vec![0.0f64; halton.dimensions()];
    let mut theta = vec![0.0f64; halton.dimensions()];
    let mut sums = ChunkSums::default();
    for i in 0..count as u64 {
        halton.point(start + i, &mut point);
        for (t, &u) in theta.iter_mut().zip(point.iter()) {
            *t = exponential_from_uniform(u);
        }
        let core = eval.eval(&theta);
        sums.sum += core.value;
        sums.sum_sq += core.value * core.value;
        sums.accepted += core.in_domain as u64;
        sums.count += 1;
    }
    sums
}

/// Estimate the regularized volume of `net`'s statistical manifold with the
/// normalization constant `kappa`.
///
/// Never errors on domain geometry: proposals outside the positive-definite
/// region contribute exactly zero. The only failure mode is a sampler that
/// cannot serve the requested dimension count.
pub fn estimate_volume(net: &Network, kappa: f64, cfg: &McConfig) -> Result<VolumeEstimate, VolumeError> {
    match cfg.sampler {
        SamplerKind::PseudoRandom => estimate_pseudo(net, kappa, cfg),
        SamplerKind::LowDiscrepancy => estimate_qmc(net, kappa, cfg),
    }
}

fn estimate_pseudo(net: &Network, kappa: f64, cfg: &McConfig) -> Result<VolumeEstimate, VolumeError> {
    let total = cfg.samples;
    let chunk = cfg.chunk_size;
    let n_chunks = total.div_ceil(chunk);
    let partials: Vec<ChunkSums> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let count = chunk.min(total - ci * chunk);
            run_pseudo_chunk(net, cfg.seed, ci as u64, count)
        })
        .collect();
    // sequential fold in chunk order keeps the sums bit-identical across
    // any thread count
    let sums = partials.into_iter().fold(ChunkSums::default(), ChunkSums::merge);
    Ok(finish_estimate(sums, kappa))
}

fn estimate_qmc(net: &Network, kappa: f64, cfg: &McConfig) -> Result<VolumeEstimate, VolumeError> {
    let n = net.n();
    if n > MAX_QMC_DIMENSIONS {
        return Err(VolumeError::SamplerDimensions { max: MAX_QMC_DIMENSIONS, got: n });
    }
    let per_rep = (cfg.samples / QMC_REPLICATIONS).max(1);
    let chunk = cfg.chunk_size.min(per_rep);
    let chunks_per_rep = per_rep.div_ceil(chunk);

    let sequences: Vec<ScrambledHalton> = (0..QMC_REPLICATIONS)
        .map(|r| {
            ScrambledHalton::new(n, cfg.seed, r as u64)
                .ok_or(VolumeError::SamplerDimensions { max: MAX_QMC_DIMENSIONS, got: n })
        })
        .collect::<Result<_, _>>()?;

    let partials: Vec<ChunkSums> = (0..QMC_REPLICATIONS * chunks_per_rep)
        .into_par_iter()
        .map(|idx| {
            let rep = idx / chunks_per_rep;
            let ci = idx % chunks_per_rep;
            let count = chunk.min(per_rep - ci * chunk);
            // Halton index 0 is skipped: starting offsets are 1-based
            run_qmc_chunk(net, &sequences[rep], (ci * chunk + 1) as u64, count)
        })
        .collect();

    let scale = kappa.exp();
    let mut rep_means = [0.0f64; QMC_REPLICATIONS];
    let mut accepted = 0u64;
    let mut count_total = 0u64;
    for rep in 0..QMC_REPLICATIONS {
        let sums = partials[rep * chunks_per_rep..(rep + 1) * chunks_per_rep]
            .iter()
            .copied()
            .fold(ChunkSums::default(), ChunkSums::merge);
        rep_means[rep] = scale * sums.sum / sums.count as f64;
        accepted += sums.accepted;
        count_total += sums.count;
    }
    let mean = rep_means.iter().sum::<f64>() / QMC_REPLICATIONS as f64;
    let var = rep_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
        / (QMC_REPLICATIONS as f64 - 1.0);
    Ok(VolumeEstimate {
        value: mean,
        stderr: (var / QMC_REPLICATIONS as f64).sqrt(),
        samples_total: count_total as usize,
        accepted_fraction: accepted as f64 / count_total as f64,
        kappa_used: kappa,
    })
}

fn finish_estimate(sums: ChunkSums, kappa: f64) -> VolumeEstimate {
    let n = sums.count as f64;
    let scale = kappa.exp();
    let mean = scale * sums.sum / n;
    let sum_sq = scale * scale * sums.sum_sq;
    let var = if sums.count > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    VolumeEstimate {
        value: mean,
        stderr: (var / n).sqrt(),
        samples_total: sums.count as usize,
        accepted_fraction: sums.accepted as f64 / n,
        kappa_used: kappa,
    }
}

/// The regularizing factor `exp(kappa - Tr C) log(1 + det(C)^n)`, evaluated
/// literally. Non-negative whenever `det C > 0`.
pub fn upsilon(c: &SymMatrix, n: usize, kappa: f64) -> f64 {
    assert_eq!(c.n(), n, "matrix order must equal n");
    let trace: f64 = (0..n).map(|i| c.get(i, i)).sum();
    let det = c.determinant();
    let mut det_n = 1.0;
    for _ in 0..n {
        det_n *= det;
    }
    (kappa - trace).exp() * det_n.ln_1p()
}

/// Fix `kappa(n)` so the edgeless n-vertex network has volume exactly one:
/// estimates the uncalibrated volume `I0(n)` and returns `-ln I0` with its
/// propagated standard error. The edgeless domain constraint is just
/// positivity of every coordinate, so every proposal is accepted.
pub fn calibrate_kappa(n: usize, cfg: &McConfig) -> Result<KappaRecord, VolumeError> {
    let net = Network::empty(n).expect("n >= 1");
    let est = estimate_volume(&net, 0.0, cfg)?;
    if !(est.value > 0.0) {
        return Err(VolumeError::CalibrationUndersampled { estimate: est.value });
    }
    Ok(KappaRecord {
        n,
        kappa: -est.value.ln(),
        kappa_stderr: est.stderr / est.value,
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

/// Entropy `-log(volume)` in the requested base, with the standard error
/// propagated to first order: `stderr / (value ln(base))`.
pub fn entropy(v: &VolumeEstimate, base: LogBase) -> Result<EntropyResult, VolumeError> {
    if !(v.value > 0.0) {
        return Err(VolumeError::NonPositiveVolume(v.value));
    }
    Ok(EntropyResult {
        // + 0.0 normalizes the negative zero at volume exactly 1
        entropy: -v.value.ln() / base.ln_of_base() + 0.0,
        entropy_stderr: v.stderr / (v.value * base.ln_of_base()),
        log_base: base,
    })
}

/// One row of the simplex table: the k-simplex network is the clique on
/// k+1 vertices with the rest isolated.
#[derive(Debug, Clone)]
pub struct SimplexRow {
    pub k: usize,
    pub volume: VolumeEstimate,
    pub entropy: EntropyResult,
}

/// Volumes and entropies of the k-simplex networks for k = 0..n-1,
/// calibrating `kappa(n)` first. Row k = 0 is the calibration self-check:
/// re-run with the calibration seed it reproduces volume 1 exactly.
pub fn simplex_table(n: usize, cfg: &McConfig, base: LogBase) -> Result<Vec<SimplexRow>, VolumeError> {
    let kr = calibrate_kappa(n, cfg)?;
    simplex_table_with_kappa(n, &kr, cfg, base)
}

/// Table rows under an already-calibrated record.
pub fn simplex_table_with_kappa(
    n: usize,
    kappa: &KappaRecord,
    cfg: &McConfig,
    base: LogBase,
) -> Result<Vec<SimplexRow>, VolumeError> {
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let net = Network::clique(n, k + 1).expect("1 <= k+1 <= n");
        let volume = estimate_volume(&net, kappa.kappa, cfg)?;
        let ent = entropy(&volume, base)?;
        rows.push(SimplexRow { k, volume, entropy: ent });
    }
    Ok(rows)
}

/// Margin between consecutive simplex volumes and its significance in
/// combined standard errors.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityRow {
    pub k: usize,
    /// `V_k - V_{k+1}`; positive if the conjectured strict decrease holds.
    pub margin: f64,
    /// Margin divided by the combined standard error of the pair.
    pub sigmas: f64,
}

/// Check the strict decrease of simplex volumes in k from a freshly
/// estimated table.
pub fn monotonicity_check(n: usize, cfg: &McConfig) -> Result<Vec<MonotonicityRow>, VolumeError> {
    let rows = simplex_table(n, cfg, LogBase::Base2)?;
    Ok(monotonicity_from_rows(&rows))
}

pub fn monotonicity_from_rows(rows: &[SimplexRow]) -> Vec<MonotonicityRow> {
    rows.windows(2)
        .map(|w| {
            let margin = w[0].volume.value - w[1].volume.value;
            let combined = (w[0].volume.stderr.powi(2) + w[1].volume.stderr.powi(2)).sqrt();
            MonotonicityRow {
                k: w[0].k,
                margin,
                sigmas: if combined > 0.0 { margin / combined } else { f64::INFINITY },
            }
        })
        .collect()
}

/// Persistent kappa cache: one `n kappa kappa_stderr samples seed` record
/// per line. The cache is advisory; unreadable lines are skipped and write
/// failures are ignored by `get_or_calibrate` (the record is recomputed
/// next time).
#[derive(Debug, Clone)]
pub struct KappaCache {
    path: Option<PathBuf>,
}

impl KappaCache {
    pub fn at(path: impl Into<PathBuf>) -> Self {
        KappaCache { path: Some(path.into()) }
    }

    /// In-memory only: every lookup misses and nothing is stored.
    pub fn disabled() -> Self {
        KappaCache { path: None }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn load(&self) -> Vec<KappaRecord> {
        let Some(path) = &self.path else { return Vec::new() };
        let Ok(text) = std::fs::read_to_string(path) else { return Vec::new() };
        text.lines().filter_map(parse_kappa_line).collect()
    }

    pub fn lookup(&self, n: usize, samples: usize, seed: u64) -> Option<KappaRecord> {
        self.load()
            .into_iter()
            .find(|r| r.n == n && r.samples == samples && r.seed == seed)
    }

    /// Insert or replace the record with the same `(n, samples, seed)` key.
    pub fn store(&self, record: &KappaRecord) -> std::io::Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let mut records = self.load();
        records.retain(|r| (r.n, r.samples, r.seed) != (record.n, record.samples, record.seed));
        records.push(record.clone());
        records.sort_by_key(|r| (r.n, r.samples, r.seed));
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let mut out = std::fs::File::create(path)?;
        for r in &records {
            writeln!(out, "{} {} {} {} {}", r.n, r.kappa, r.kappa_stderr, r.samples, r.seed)?;
        }
        Ok(())
    }

    /// Cached record for `(n, cfg.samples, cfg.seed)`, calibrating on a
    /// miss (or when `recalibrate` forces it). Returns the record and
    /// whether it came from the cache.
    pub fn get_or_calibrate(
        &self,
        n: usize,
        cfg: &McConfig,
        recalibrate: bool,
    ) -> Result<(KappaRecord, bool), VolumeError> {
        if !recalibrate {
            if let Some(hit) = self.lookup(n, cfg.samples, cfg.seed) {
                return Ok((hit, true));
            }
        }
        let record = calibrate_kappa(n, cfg)?;
        let _ = self.store(&record);
        Ok((record, false))
    }
}

fn parse_kappa_line(line: &str) -> Option<KappaRecord> {
    let mut it = line.split_whitespace();
    let n = it.next()?.parse().ok()?;
    let kappa: f64 = it.next()?.parse().ok()?;
    let kappa_stderr: f64 = it.next()?.parse().ok()?;
    let samples = it.next()?.parse().ok()?;
    let seed = it.next()?.parse().ok()?;
    if it.next().is_some() || !kappa.is_finite() || !kappa_stderr.is_finite() {
        return None;
    }
    Some(KappaRecord { n, kappa, kappa_stderr, samples, seed })
}
