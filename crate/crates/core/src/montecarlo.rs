//! Seeded Monte-Carlo reference for VaR and ES.
//!
//! Draws come from ChaCha20 (`rand_chacha`): stream `i` of a run is
//! `ChaCha20Rng::seed_from_u64(seed)` switched to stream `i`, so a run is
//! fully determined by `(sample_count, seed, stream_count)` regardless of the
//! number of worker threads. Streams are generated in parallel and
//! concatenated in stream order before sorting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::gamma::ln_gamma;

use crate::distributions::{LossSpec, Severity};
use crate::error::{Error, Result};

/// Largest sample kept in memory.
pub const MAX_SAMPLES: usize = 10_000_000;

/// Below this many expected tail draws an estimate is flagged sparse.
pub const SPARSE_TAIL: f64 = 20.0;

const CI_LEVEL: f64 = 0.99;

// Above this mean, Poisson draws switch from inversion to PTRD.
const POISSON_INVERSION_MAX: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub stream_count: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            sample_count: 1_000_000,
            seed: 1,
            stream_count: 8,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 || self.sample_count > MAX_SAMPLES {
            return Err(Error::domain(format!(
                "sample count must be in 1..={MAX_SAMPLES}, got {}",
                self.sample_count
            )));
        }
        if self.stream_count == 0 {
            return Err(Error::domain("stream count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub alpha: f64,
    pub var_estimate: f64,
    pub es_estimate: f64,
    /// 99% order-statistic bounds for the true VaR.
    pub var_ci_low: f64,
    pub var_ci_high: f64,
    pub n: usize,
    /// Number of draws at or above the VaR estimate.
    pub tail_count: usize,
    /// `n (1 - α) < 20`: too few tail draws for a stable estimate.
    pub sparse_tail: bool,
}

/// One loss draw.
pub fn sample_loss<R: Rng + ?Sized>(spec: &LossSpec, rng: &mut R) -> Result<f64> {
    Ok(match *spec {
        LossSpec::Exponential { rate } => sample_exponential(rate, rng),
        LossSpec::ParetoI { shape, scale } => {
            // 1 - U lies in (0, 1]
            let u = 1.0 - rng.random::<f64>();
            scale * u.powf(-1.0 / shape)
        }
        LossSpec::Lognormal { mu, sigma_sq } => sample_lognormal(mu, sigma_sq, rng),
        LossSpec::CompoundPoisson { lambda, severity } => {
            let n = sample_poisson(lambda, rng);
            (0..n).map(|_| sample_severity(&severity, rng)).sum()
        }
        LossSpec::CompoundGeneral { .. } => {
            return Err(Error::Unsupported(
                "a compound loss given only by moment summaries cannot be sampled".into(),
            ))
        }
    })
}

fn sample_severity<R: Rng + ?Sized>(severity: &Severity, rng: &mut R) -> f64 {
    match *severity {
        Severity::Exponential { rate } => sample_exponential(rate, rng),
        Severity::Lognormal { mu, sigma_sq } => sample_lognormal(mu, sigma_sq, rng),
    }
}

fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

fn sample_lognormal<R: Rng + ?Sized>(mu: f64, sigma_sq: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (mu + sigma_sq.sqrt() * z).exp()
}

/// Poisson draw: sequential-search inversion for `λ <= 30`, Hörmann's PTRD
/// transformed rejection above.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda <= POISSON_INVERSION_MAX {
        poisson_inversion(lambda, rng)
    } else {
        poisson_ptrd(lambda, rng)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cum = p;
    // The cap only matters when rounding keeps `cum` just below `u`.
    while cum < u && k < 1000 {
        k += 1;
        p *= lambda / k as f64;
        cum += p;
    }
    k
}

fn poisson_ptrd<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let accept = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= -lambda + k * loglam - ln_gamma(k + 1.0);
        if accept {
            return k as u64;
        }
    }
}

/// Sorted draws of one run, reusable for any number of confidence levels.
#[derive(Debug, Clone)]
pub struct SampleSet {
    sorted: Vec<f64>,
}

impl SampleSet {
    pub fn generate(spec: &LossSpec, cfg: &McConfig) -> Result<SampleSet> {
        cfg.validate()?;
        spec.validate()?;
        if matches!(spec, LossSpec::CompoundGeneral { .. }) {
            // fail before spawning work
            sample_loss(spec, &mut ChaCha20Rng::seed_from_u64(0))?;
        }
        let per = cfg.sample_count / cfg.stream_count;
        let extra = cfg.sample_count % cfg.stream_count;
        let chunks: Vec<Vec<f64>> = (0..cfg.stream_count)
            .into_par_iter()
            .map(|i| {
                let count = per + usize::from(i < extra);
                let mut rng = stream_rng(cfg.seed, i);
                (0..count)
                    .map(|_| sample_loss(spec, &mut rng).expect("validated spec"))
                    .collect()
            })
            .collect();
        Ok(SampleSet::from_draws(chunks.concat()))
    }

    pub fn from_draws(mut draws: Vec<f64>) -> SampleSet {
        draws.sort_unstable_by(f64::total_cmp);
        SampleSet { sorted: draws }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// Empirical VaR (order statistic of rank `⌈α n⌉`), the mean of the
    /// draws at or above it, and 99% binomial order-statistic bounds.
    pub fn estimate(&self, alpha: f64) -> Result<McEstimate> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("confidence level must be in (0, 1), got {alpha}")));
        }
        let n = self.sorted.len();
        if n == 0 {
            return Err(Error::Estimation("no draws".into()));
        }
        let rank = quantile_rank(alpha, n);
        let var = self.sorted[rank - 1];
        let start = self.sorted.partition_point(|&x| x < var);
        let tail = &self.sorted[start..];
        if tail.is_empty() {
            return Err(Error::Estimation(format!("empty tail at alpha = {alpha}")));
        }
        let es = tail.iter().sum::<f64>() / tail.len() as f64;
        let (lo, hi) = ci_ranks(alpha, n)?;
        Ok(McEstimate {
            alpha,
            var_estimate: var,
            es_estimate: es.max(var),
            var_ci_low: self.sorted[lo - 1],
            var_ci_high: self.sorted[hi - 1],
            n,
            tail_count: tail.len(),
            sparse_tail: (n as f64) * (1.0 - alpha) < SPARSE_TAIL,
        })
    }
}

/// Stream `index` of the run seeded with `seed`.
pub fn stream_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `⌈α n⌉` clamped to `1..=n`; products within rounding of an integer are
/// taken as that integer, so that e.g. `0.99 · 10⁶` gives 990000.
pub fn quantile_rank(alpha: f64, n: usize) -> usize {
    let r = alpha * n as f64;
    let nearest = r.round();
    let rank = if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        r.ceil()
    };
    (rank as usize).clamp(1, n)
}

/// Ranks `(l, u)` with `P(X_(l) <= q_α <= X_(u)) >= 99%` (approximately,
/// with equal tails), from the Binomial(n, α) count of draws below `q_α`.
pub fn ci_ranks(alpha: f64, n: usize) -> Result<(usize, usize)> {
    let bin = Binomial::new(alpha, n as u64).map_err(|e| Error::Estimation(e.to_string()))?;
    let half = 0.5 * (1.0 - CI_LEVEL);
    let lo = bin.inverse_cdf(half) as usize;
    let hi = bin.inverse_cdf(1.0 - half) as usize + 1;
    Ok((lo.clamp(1, n), hi.clamp(1, n)))
}

/// Generates a sample for `spec` and estimates VaR and ES at `alpha`.
pub fn estimate_risk(spec: &LossSpec, alpha: f64, cfg: &McConfig) -> Result<McEstimate> {
    SampleSet::generate(spec, cfg)?.estimate(alpha)
}
