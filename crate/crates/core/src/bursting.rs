//! Herbivore bursts under small positive noise: noisy simulation, resident
//! time ratio, burst period, and sweeps over the noise amplitude.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::system::{check_bounded, State, SystemSpec, Trajectory};

pub const DEFAULT_THRESHOLD: f64 = 0.01;
/// Generations dropped before any statistic is computed.
pub const DEFAULT_TRANSIENT: usize = 100;
/// Fewest post-transient samples accepted by the statistics.
pub const MIN_SAMPLES: usize = 100;

/// Which quantity receives the additive noise term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScheme {
    /// The deterministic herbivore update plus `omega * R`.
    #[default]
    HerbivoreAdditive,
    /// `H' = F(P) e^{-aH} + omega * R`, i.e. the plant update reused for `H`.
    AsPrinted,
}

impl FromStr for NoiseScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "herbivore-additive" | "additive" => Ok(NoiseScheme::HerbivoreAdditive),
            "as-printed" => Ok(NoiseScheme::AsPrinted),
            other => Err(Error::usage(format!(
                "unknown noise scheme `{other}` (expected herbivore-additive or as-printed)"
            ))),
        }
    }
}

impl fmt::Display for NoiseScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseScheme::HerbivoreAdditive => "herbivore-additive",
            NoiseScheme::AsPrinted => "as-printed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub omega: f64,
    pub seed: u64,
    pub scheme: NoiseScheme,
}

impl NoiseSpec {
    pub fn new(omega: f64, seed: u64, scheme: NoiseScheme) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InadmissibleParam {
                name: "omega".into(),
                value: omega,
                reason: "noise amplitude must be finite and nonnegative".into(),
            });
        }
        Ok(NoiseSpec { omega, seed, scheme })
    }
}

/// A standard normal conditioned on being nonnegative (rejection of negatives).
pub fn sample_positive_noise(rng: &mut Rng) -> f64 {
    rng.positive_normal()
}

/// Runs the map for `t` generations with noise added to the herbivore update.
pub fn simulate_noisy(spec: &SystemSpec, noise: &NoiseSpec, s0: State, t: usize) -> Result<Trajectory> {
    s0.validate()?;
    if t == 0 {
        return Err(Error::usage("number of generations must be at least 1"));
    }
    let mut rng = Rng::seed(noise.seed);
    let mut states = Vec::with_capacity(t + 1);
    states.push(s0);
    let mut s = s0;
    for k in 1..=t {
        let next = spec.step(s);
        let kick = noise.omega * sample_positive_noise(&mut rng);
        let h = match noise.scheme {
            NoiseScheme::HerbivoreAdditive => next.h + kick,
            NoiseScheme::AsPrinted => next.p + kick,
        };
        s = State { p: next.p, h };
        check_bounded(k, s)?;
        states.push(s);
    }
    Ok(Trajectory { states, t0: 0, stride: 1 })
}

fn post_transient(h: &[f64], transient: usize) -> Result<&[f64]> {
    let tail = h.get(transient..).unwrap_or(&[]);
    if tail.len() < MIN_SAMPLES {
        return Err(Error::TooShort { len: tail.len(), min: MIN_SAMPLES });
    }
    Ok(tail)
}

/// Fraction of post-transient generations with `H < threshold`.
pub fn resident_time_ratio(h: &[f64], threshold: f64, transient: usize) -> Result<f64> {
    let tail = post_transient(h, transient)?;
    Ok(tail.iter().filter(|&&x| x < threshold).count() as f64 / tail.len() as f64)
}

/// Indices `t` (within the post-transient tail) with `H[t-1] < th <= H[t]`.
pub fn upward_crossings(h: &[f64], threshold: f64, transient: usize) -> Result<Vec<usize>> {
    let tail = post_transient(h, transient)?;
    Ok((1..tail.len())
        .filter(|&t| tail[t - 1] < threshold && threshold <= tail[t])
        .collect())
}

/// Mean spacing between consecutive upward threshold crossings.
pub fn burst_period(h: &[f64], threshold: f64, transient: usize) -> Result<f64> {
    let c = upward_crossings(h, threshold, transient)?;
    period_from_crossings(&c)
}

fn period_from_crossings(c: &[usize]) -> Result<f64> {
    if c.len() < 2 {
        return Err(Error::NoBursts { crossings: c.len() });
    }
    Ok((c[c.len() - 1] - c[0]) as f64 / (c.len() - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub run: usize,
    pub seed: u64,
    pub ratio: f64,
    /// `None` when the run had fewer than two upward crossings.
    pub period: Option<f64>,
    pub n_bursts: usize,
}

impl RunStats {
    pub fn from_series(run: usize, seed: u64, h: &[f64], threshold: f64, transient: usize) -> Result<Self> {
        let ratio = resident_time_ratio(h, threshold, transient)?;
        let crossings = upward_crossings(h, threshold, transient)?;
        Ok(RunStats {
            run,
            seed,
            ratio,
            period: period_from_crossings(&crossings).ok(),
            n_bursts: crossings.len(),
        })
    }
}

/// Aggregate over the runs of one noise amplitude. Runs without a defined
/// period are counted in `n_undefined` and left out of the period mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstStats {
    pub omega: f64,
    pub threshold: f64,
    pub resident_time_ratio: f64,
    pub ratio_std: f64,
    pub mean_period: Option<f64>,
    pub period_std: Option<f64>,
    pub n_bursts: usize,
    pub n_undefined: usize,
    pub per_trajectory: Vec<RunStats>,
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((m, var.sqrt()))
}

impl BurstStats {
    pub fn aggregate(omega: f64, threshold: f64, mut runs: Vec<RunStats>) -> Self {
        runs.sort_by_key(|r| r.run);
        let ratios: Vec<f64> = runs.iter().map(|r| r.ratio).collect();
        let periods: Vec<f64> = runs.iter().filter_map(|r| r.period).collect();
        let (ratio, ratio_std) = mean_std(&ratios).unwrap_or((f64::NAN, f64::NAN));
        let p = mean_std(&periods);
        BurstStats {
            omega,
            threshold,
            resident_time_ratio: ratio,
            ratio_std,
            mean_period: p.map(|x| x.0),
            period_std: p.map(|x| x.1),
            n_bursts: runs.iter().map(|r| r.n_bursts).sum(),
            n_undefined: runs.len() - periods.len(),
            per_trajectory: runs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub runs: usize,
    pub generations: usize,
    pub seed: u64,
    pub threshold: f64,
    pub transient: usize,
    pub scheme: NoiseScheme,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            runs: 50,
            generations: 1000,
            seed: 42,
            threshold: DEFAULT_THRESHOLD,
            transient: DEFAULT_TRANSIENT,
            scheme: NoiseScheme::HerbivoreAdditive,
        }
    }
}

/// Seed of run `k` in a sweep with base seed `base`.
pub fn run_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add(k as u64)
}

/// For every `omega`, runs `settings.runs` trajectories from `s0` (run `k`
/// uses seed `base + k`) and aggregates their burst statistics. Runs execute
/// on the current rayon pool; output order does not depend on scheduling.
pub fn noise_sweep(spec: &SystemSpec, s0: State, omegas: &[f64], settings: &SweepSettings) -> Result<Vec<BurstStats>> {
    if settings.runs == 0 {
        return Err(Error::usage("at least one run per noise level is required"));
    }
    omegas
        .iter()
        .map(|&omega| {
            let runs = (0..settings.runs)
                .into_par_iter()
                .map(|k| {
                    let seed = run_seed(settings.seed, k);
                    let noise = NoiseSpec::new(omega, seed, settings.scheme)?;
                    let traj = simulate_noisy(spec, &noise, s0, settings.generations)?;
                    let h: Vec<f64> = traj.herbivore().collect();
                    RunStats::from_series(k, seed, &h, settings.threshold, settings.transient)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BurstStats::aggregate(omega, settings.threshold, runs))
        })
        .collect()
}
