//! Replica-exchange (parallel tempering) Monte Carlo over a target energy.
//!
//! N replicas run single-site Metropolis dynamics at inverse temperatures on
//! a geometric ladder. One Monte Carlo sweep (MCS) is nx sequential
//! single-site proposals. Adjacent replicas attempt state exchanges every
//! `swap_interval_mcs` sweeps, alternating between pairs starting at replica
//! 0 and pairs starting at replica 1. The largest-beta replica is recorded
//! every `record_interval_mcs` sweeps; after discarding a burn-in prefix,
//! the earliest records become the training set and the latest records the
//! validation set.
//!
//! Each replica owns a named RNG stream, so a parallel sweep over replicas
//! is bit-identical to the serial loop.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::rbm::BitConfig;
use crate::rng::{stream, Stream};
use crate::target::TargetModel;

/// Tracked raw energies are recomputed from scratch this often (in MCS) to
/// stop incremental float drift from accumulating over long runs.
const ENERGY_REFRESH_INTERVAL: u64 = 1024;

/// Geometric inverse-temperature ladder with exact endpoints:
/// beta_i = beta_min * (beta_max / beta_min)^(i / (n - 1)).
pub fn geometric_ladder(n: usize, beta_min: f64, beta_max: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "ladder needs at least 2 replicas, got {}",
            n
        )));
    }
    if !(beta_min.is_finite() && beta_max.is_finite() && 0.0 < beta_min && beta_min < beta_max) {
        return Err(Error::invalid(format!(
            "ladder endpoints must satisfy 0 < beta_min < beta_max, got ({}, {})",
            beta_min, beta_max
        )));
    }
    let log_ratio = (beta_max / beta_min).ln();
    let mut ladder: Vec<f64> = (0..n)
        .map(|i| beta_min * (log_ratio * i as f64 / (n - 1) as f64).exp())
        .collect();
    ladder[0] = beta_min;
    ladder[n - 1] = beta_max;
    Ok(ladder)
}

/// Settings for one replica-exchange data-generation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtConfig {
    pub n_replicas: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Total Monte Carlo sweeps; each sweep is nx single-site proposals.
    pub total_mcs: u64,
    /// Sweeps between swap passes.
    pub swap_interval_mcs: u64,
    /// Sweeps between records of the largest-beta replica.
    pub record_interval_mcs: u64,
    /// Leading records discarded before the train/val split.
    pub burn_in_records: u64,
    pub train_size: usize,
    pub val_size: usize,
}

impl PtConfig {
    /// Number of records the run will produce before burn-in discard.
    pub fn total_records(&self) -> u64 {
        self.total_mcs / self.record_interval_mcs.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        geometric_ladder(self.n_replicas, self.beta_min, self.beta_max)?;
        if self.total_mcs == 0 || self.swap_interval_mcs == 0 || self.record_interval_mcs == 0 {
            return Err(Error::invalid(
                "total_mcs, swap_interval_mcs, and record_interval_mcs must be positive",
            ));
        }
        if self.train_size == 0 || self.val_size == 0 {
            return Err(Error::invalid("train_size and val_size must be positive"));
        }
        let records = self.total_records();
        if self.burn_in_records >= records {
            return Err(Error::Infeasible(format!(
                "burn-in of {} records consumes all {} records",
                self.burn_in_records, records
            )));
        }
        let usable = records - self.burn_in_records;
        let needed = self.train_size as u64 + self.val_size as u64;
        if needed > usable {
            return Err(Error::Infeasible(format!(
                "train + val = {} records requested but only {} remain after burn-in",
                needed, usable
            )));
        }
        Ok(())
    }
}

/// One replica: a fixed ladder slot holding a configuration and its tracked
/// raw energy.
#[derive(Clone, Debug)]
pub struct Replica {
    pub beta: f64,
    pub state: BitConfig,
    pub raw_energy: f64,
}

impl Replica {
    pub fn new(model: &TargetModel, beta: f64, state: BitConfig) -> Result<Self> {
        let raw_energy = model.raw_energy(&state)?;
        Ok(Replica { beta, state, raw_energy })
    }
}

/// One Metropolis sweep: nx sequential single-site proposals. Proposal at
/// site k flips bit k and is accepted iff u < exp(-beta * delta_raw), with
/// one uniform variate drawn per proposal whether or not it is needed.
/// Returns the number of accepted flips; `raw_energy` is kept in sync.
pub fn metropolis_sweep(
    model: &TargetModel,
    beta: f64,
    state: &mut BitConfig,
    raw_energy: &mut f64,
    rng: &mut Stream,
) -> Result<usize> {
    let mut accepted = 0;
    for site in 0..state.len() {
        let delta = model.raw_energy_delta(state, site)?;
        let u: f64 = rng.random();
        let threshold = (-beta * delta).exp();
        if u < threshold {
            state.flip(site);
            *raw_energy += delta;
            accepted += 1;
        }
    }
    Ok(accepted)
}

/// Attempts a state exchange between adjacent ladder slots i and i + 1,
/// accepted with probability min(1, exp((beta_i - beta_j)(E_i - E_j))) on
/// raw energies. One uniform variate is always drawn. Returns whether the
/// exchange happened.
pub fn swap_attempt(
    replicas: &mut [Replica],
    i: usize,
    j: usize,
    rng: &mut Stream,
) -> Result<bool> {
    if j != i + 1 || j >= replicas.len() {
        return Err(Error::invalid(format!(
            "swap requires adjacent ladder slots, got ({}, {}) with {} replicas",
            i,
            j,
            replicas.len()
        )));
    }
    let log_p = (replicas[i].beta - replicas[j].beta) * (replicas[i].raw_energy - replicas[j].raw_energy);
    let u: f64 = rng.random();
    let accept = u < log_p.exp();
    if accept {
        let (a, b) = replicas.split_at_mut(j);
        std::mem::swap(&mut a[i].state, &mut b[0].state);
        std::mem::swap(&mut a[i].raw_energy, &mut b[0].raw_energy);
    }
    Ok(accept)
}

/// Runs the full replica-exchange pipeline and splits the recorded
/// largest-beta trajectory into train and validation datasets: after
/// discarding `burn_in_records`, the first `train_size` records form the
/// training set and the last `val_size` records form the validation set.
///
/// The ladder top must coincide with the model's inverse temperature, since
/// the recorded replica is meant to sample the model's own Boltzmann
/// distribution.
pub fn generate_dataset(
    model: &TargetModel,
    cfg: &PtConfig,
    master_seed: u64,
) -> Result<(Dataset, Dataset)> {
    cfg.validate()?;
    if (cfg.beta_max - model.beta()).abs() > 1e-12 {
        return Err(Error::Infeasible(format!(
            "ladder top {} must equal the model inverse temperature {}",
            cfg.beta_max,
            model.beta()
        )));
    }
    let ladder = geometric_ladder(cfg.n_replicas, cfg.beta_min, cfg.beta_max)?;
    let nx = model.nx();

    let mut replicas = Vec::with_capacity(cfg.n_replicas);
    for (i, &beta) in ladder.iter().enumerate() {
        let init = BitConfig::random(nx, &mut stream(master_seed, &format!("pt/init/{}", i)));
        replicas.push(Replica::new(model, beta, init)?);
    }
    let mut sweep_rngs: Vec<Stream> = (0..cfg.n_replicas)
        .map(|i| stream(master_seed, &format!("pt/replica/{}", i)))
        .collect();
    let mut swap_rng = stream(master_seed, "pt/swap");

    let mut records: Vec<BitConfig> = Vec::with_capacity(cfg.total_records() as usize);
    let top = cfg.n_replicas - 1;

    for mcs in 1..=cfg.total_mcs {
        replicas
            .par_iter_mut()
            .zip(sweep_rngs.par_iter_mut())
            .try_for_each(|(replica, rng)| -> Result<()> {
                metropolis_sweep(model, replica.beta, &mut replica.state, &mut replica.raw_energy, rng)?;
                if mcs % ENERGY_REFRESH_INTERVAL == 0 {
                    replica.raw_energy = model.raw_energy(&replica.state)?;
                }
                Ok(())
            })?;

        if mcs % cfg.swap_interval_mcs == 0 {
            let pass = mcs / cfg.swap_interval_mcs;
            let offset = if pass % 2 == 1 { 0 } else { 1 };
            let mut i = offset;
            while i + 1 < cfg.n_replicas {
                swap_attempt(&mut replicas, i, i + 1, &mut swap_rng)?;
                i += 2;
            }
        }

        if mcs % cfg.record_interval_mcs == 0 {
            records.push(replicas[top].state.clone());
        }
    }

    let usable = &records[cfg.burn_in_records as usize..];
    let train_samples = usable[..cfg.train_size].to_vec();
    let val_samples = usable[usable.len() - cfg.val_size..].to_vec();

    let meta = |split: &str| DatasetMeta {
        source: "parallel-tempering".into(),
        model_hash: Some(model.hash()),
        model_text: Some(model.canonical_text()),
        seed: Some(master_seed),
        config: Some(
            serde_json::json!({ "pt": cfg, "split": split }),
        ),
    };
    let train = Dataset::new(nx, train_samples, meta("train"))?;
    let val = Dataset::new(nx, val_samples, meta("val"))?;
    Ok((train, val))
}
