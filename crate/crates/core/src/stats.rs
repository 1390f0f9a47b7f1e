//! Moment estimates with batch-means error bars, CLT diagnostics and
//! concentration scans for sampled total spins.
//!
//! Standard errors are reported as one standard error.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::graph_models::{DegreeSequence, WeightSequence};
use crate::samplers::{self, ChainConfig, SampleBatch};

pub const MIN_ESS_MOMENTS: f64 = 100.0;
pub const MIN_ESS_CLT: f64 = 500.0;
const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub samples: usize,
    pub n: usize,
    /// Mean of `S_N / N`.
    pub mean: f64,
    pub mean_se: f64,
    /// Variance of `S_N / sqrt(N)`.
    pub variance: f64,
    pub variance_se: f64,
    pub ess: f64,
    /// Integrated autocorrelation time `samples / ess`.
    pub tau: f64,
    pub batch_size: usize,
    pub batches: usize,
}

/// Batch size `floor(sqrt(n))`, shrunk so that at least 20 batches remain.
fn batch_layout(len: usize) -> Result<(usize, usize)> {
    if len < MIN_BATCHES * 2 {
        return Err(invalid(format!("{len} samples are too few for batch means")));
    }
    let mut size = (len as f64).sqrt().floor() as usize;
    if len / size < MIN_BATCHES {
        size = len / MIN_BATCHES;
    }
    Ok((size, len / size))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// ESS from batch means: `n s² / (b Var(batch means))`.
fn batch_ess(values: &[f64]) -> Result<(f64, usize, usize)> {
    let (size, count) = batch_layout(values.len())?;
    let used = &values[..size * count];
    let s2 = sample_variance(used);
    let means: Vec<f64> = used.chunks(size).map(mean).collect();
    let vb = sample_variance(&means);
    let ess = if s2 == 0.0 {
        used.len() as f64
    } else if vb == 0.0 {
        f64::INFINITY
    } else {
        (used.len() as f64 * s2 / (size as f64 * vb)).min(used.len() as f64 * 100.0)
    };
    Ok((ess, size, count))
}

/// Mean and variance of the recorded total spins with batch-means standard
/// errors; the variance error bar is a jackknife over batches.
pub fn estimate_moments(batch: &SampleBatch) -> Result<VarianceEstimate> {
    estimate_moments_raw(&batch.values, batch.n)
}

pub fn estimate_moments_raw(values: &[f64], n: usize) -> Result<VarianceEstimate> {
    if n == 0 {
        return Err(invalid("N must be positive"));
    }
    let (ess, size, count) = batch_ess(values)?;
    if ess < MIN_ESS_MOMENTS {
        return Err(Error::InsufficientEss {
            ess,
            required: MIN_ESS_MOMENTS,
        });
    }
    let used = &values[..size * count];
    let nf = n as f64;
    let means: Vec<f64> = used.chunks(size).map(mean).collect();
    let variance = sample_variance(used) / nf;

    // Delete-one-batch jackknife on the variance.
    let total: f64 = used.iter().sum();
    let total_sq: f64 = used.iter().map(|x| x * x).sum();
    let leave_out: Vec<f64> = used
        .chunks(size)
        .map(|c| {
            let m = (used.len() - c.len()) as f64;
            let s = total - c.iter().sum::<f64>();
            let sq = total_sq - c.iter().map(|x| x * x).sum::<f64>();
            (sq - s * s / m) / (m - 1.0) / nf
        })
        .collect();
    let jack_mean = mean(&leave_out);
    let k = count as f64;
    let variance_se = ((k - 1.0) / k * leave_out.iter().map(|v| (v - jack_mean).powi(2)).sum::<f64>()).sqrt();

    Ok(VarianceEstimate {
        samples: used.len(),
        n,
        mean: mean(used) / nf,
        mean_se: (sample_variance(&means) / k).sqrt() / nf,
        variance,
        variance_se,
        ess,
        tau: used.len() as f64 / ess,
        batch_size: size,
        batches: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltReport {
    pub samples: usize,
    pub ess: f64,
    /// Variance of `S_N / sqrt(N)` used for standardization.
    pub variance_used: f64,
    pub skewness: f64,
    pub skewness_se: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_se: f64,
    pub ks_distance: f64,
    pub ks_critical: f64,
    pub skewness_ok: bool,
    pub kurtosis_ok: bool,
    pub ks_ok: bool,
}

impl CltReport {
    pub fn passed(&self) -> bool {
        self.skewness_ok && self.kurtosis_ok && self.ks_ok
    }
}

/// Moment tolerance in asymptotic standard errors.
const MOMENT_Z: f64 = 4.0;
/// Kolmogorov critical constant at significance 0.01.
const KS_CONSTANT: f64 = 1.628;

/// Standardizes `S_N` by its sample mean and `sqrt(N · predicted_variance)`
/// (sample variance when no prediction is given) and checks skewness,
/// excess kurtosis and Kolmogorov distance. `lattice_step` applies a
/// continuity correction for integer-lattice data such as `S_N` (step 2).
pub fn clt_diagnostics(
    values: &[f64],
    n: usize,
    predicted_variance: Option<f64>,
    lattice_step: Option<f64>,
) -> Result<CltReport> {
    let (ess, _, _) = batch_ess(values)?;
    if ess < MIN_ESS_CLT {
        return Err(Error::InsufficientEss {
            ess,
            required: MIN_ESS_CLT,
        });
    }
    let nf = n as f64;
    let m = mean(values);
    let sample_var = sample_variance(values);
    let variance_used = predicted_variance.unwrap_or(sample_var / nf);
    if !(variance_used > 0.0) {
        return Err(invalid("variance must be positive for standardization"));
    }
    let sd = (variance_used * nf).sqrt();
    let len = values.len() as f64;
    let central = |k: i32| values.iter().map(|x| ((x - m) / sample_var.sqrt()).powi(k)).sum::<f64>() / len;
    let skewness = central(3);
    let excess_kurtosis = central(4) - 3.0;
    let skewness_se = (6.0 / ess).sqrt();
    let kurtosis_se = (24.0 / ess).sqrt();

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut ks: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / len;
        let upto = j as f64 / len;
        match lattice_step {
            Some(step) => {
                let cdf = normal.cdf((x + 0.5 * step - m) / sd);
                ks = ks.max((upto - cdf).abs());
            }
            None => {
                let cdf = normal.cdf((x - m) / sd);
                ks = ks.max((upto - cdf).abs()).max((below - cdf).abs());
            }
        }
        i = j;
    }
    let ks_critical = KS_CONSTANT / ess.sqrt();
    Ok(CltReport {
        samples: values.len(),
        ess,
        variance_used,
        skewness,
        skewness_se,
        excess_kurtosis,
        kurtosis_se,
        ks_distance: ks,
        ks_critical,
        skewness_ok: skewness.abs() <= MOMENT_Z * skewness_se,
        kurtosis_ok: excess_kurtosis.abs() <= MOMENT_Z * kurtosis_se,
        ks_ok: ks <= ks_critical,
    })
}

/// Models for concentration scans.
#[derive(Debug, Clone, PartialEq)]
pub enum SllnModel {
    GrgConstant { w: f64 },
    GrgPowerLaw { tau: f64, w_min: f64 },
    Cm2,
    Cm12 { p: f64 },
}

impl SllnModel {
    fn weights(&self, n: usize) -> Result<Option<WeightSequence>> {
        Ok(match self {
            SllnModel::GrgConstant { w } => Some(WeightSequence::constant(*w, n)?),
            SllnModel::GrgPowerLaw { tau, w_min } => Some(WeightSequence::power_law(*tau, *w_min, n)?),
            _ => None,
        })
    }

    /// Limiting magnetization `M̃`; for GRG the weights at the given `N` are used.
    pub fn magnetization(&self, beta: f64, b: f64, n: usize) -> Result<f64> {
        match self {
            SllnModel::Cm2 => crate::cm2::magnetization_cm2(beta, b),
            SllnModel::Cm12 { p } => crate::cm12::magnetization_cm12(beta, b, *p),
            _ => {
                let w = self.weights(n)?.expect("GRG model");
                crate::grg::annealed_magnetization(&crate::grg::AnnealedGrgModel::new(w, beta, b)?)
            }
        }
    }

    pub fn sample(&self, beta: f64, b: f64, n: usize, config: &ChainConfig) -> Result<SampleBatch> {
        match self {
            SllnModel::Cm2 => samplers::joint_mcmc_cm(&DegreeSequence::two_regular(n)?, beta, b, config),
            SllnModel::Cm12 { p } => samplers::joint_mcmc_cm(&DegreeSequence::cm12(*p, n)?, beta, b, config),
            _ => {
                let w = self.weights(n)?.expect("GRG model");
                samplers::glauber_annealed_grg(&w, beta, b, config)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SllnRow {
    pub n: usize,
    pub samples: usize,
    pub deviations: usize,
    pub frequency: f64,
    /// `ln(frequency)`, `-inf` when no deviation was seen.
    pub ln_frequency: f64,
}

/// Frequency of `|S_N/N - M̃| >= ε` for each `N`; the chain seed for the
/// `k`-th size is `config.seed + k`.
pub fn slln_scan(
    model: &SllnModel,
    beta: f64,
    b: f64,
    eps: f64,
    n_list: &[usize],
    config: &ChainConfig,
) -> Result<Vec<SllnRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("N list must be strictly increasing"));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let target = model.magnetization(beta, b, n)?;
            let cfg = ChainConfig {
                seed: config.seed.wrapping_add(k as u64),
                ..config.clone()
            };
            let batch = model.sample(beta, b, n, &cfg)?;
            let deviations = batch
                .values
                .iter()
                .filter(|&&s| (s / n as f64 - target).abs() >= eps)
                .count();
            let frequency = deviations as f64 / batch.len() as f64;
            Ok(SllnRow {
                n,
                samples: batch.len(),
                deviations,
                frequency,
                ln_frequency: frequency.ln(),
            })
        })
        .collect()
}

/// Least-squares slope of `ln(frequency)` against `N` over rows with a
/// nonzero frequency; `None` with fewer than two such rows.
pub fn slln_decay_slope(rows: &[SllnRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.frequency > 0.0)
        .map(|r| (r.n as f64, r.ln_frequency))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
