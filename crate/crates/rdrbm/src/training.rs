//! Training objectives and the minibatch training loop.
//!
//! All four objectives share the same data flow: a minibatch of training
//! samples, a matching slice of persistent chains advanced by k block Gibbs
//! steps under the current parameters, a descent gradient fed to Adam.
//! Gradients treat the chain samples as fixed (no derivative through the
//! sampling distribution); for the forward and reverse KLD estimators that
//! convention still yields the exact gradient of the respective divergence
//! in expectation.
//!
//! Residuals are always formed between the RBM free energy and the
//! beta-scaled effective target energy, so both live on the same scale.

use std::time::Instant;

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::r_theta;
use crate::rbm::{BitConfig, FreeEnergyGrad, RbmParams};
use crate::rng::{stream, Stream};
use crate::target::TargetModel;

/// Training objective selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    ForwardKld,
    ReverseKld,
    SummationKld,
    RatioDivergence,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::ForwardKld,
        Objective::ReverseKld,
        Objective::SummationKld,
        Objective::RatioDivergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Objective::ForwardKld => "forward-kld",
            Objective::ReverseKld => "reverse-kld",
            Objective::SummationKld => "summation-kld",
            Objective::RatioDivergence => "ratio-divergence",
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward-kld" => Ok(Objective::ForwardKld),
            "reverse-kld" => Ok(Objective::ReverseKld),
            "summation-kld" => Ok(Objective::SummationKld),
            "ratio-divergence" | "rd" => Ok(Objective::RatioDivergence),
            other => Err(Error::invalid(format!(
                "unknown objective {:?}; expected forward-kld, reverse-kld, \
                 summation-kld, or ratio-divergence",
                other
            ))),
        }
    }
}

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam state over the three RBM parameter blocks.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: FreeEnergyGrad,
    v: FreeEnergyGrad,
    t: u64,
}

impl AdamState {
    pub fn new(nx: usize, nh: usize) -> Self {
        AdamState {
            m: FreeEnergyGrad::zeros(nx, nh),
            v: FreeEnergyGrad::zeros(nx, nh),
            t: 0,
        }
    }

    /// Applies one descent step for the given gradient.
    pub fn step(&mut self, params: &mut RbmParams, grad: &FreeEnergyGrad, cfg: &AdamConfig) {
        self.t += 1;
        let corr1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let corr2 = 1.0 - cfg.beta2.powi(self.t as i32);

        fn update_block<D: ndarray::Dimension>(
            m: &mut ndarray::Array<f64, D>,
            v: &mut ndarray::Array<f64, D>,
            g: &ndarray::Array<f64, D>,
            delta: &mut ndarray::Array<f64, D>,
            cfg: &AdamConfig,
            corr1: f64,
            corr2: f64,
        ) {
            Zip::from(m).and(v).and(g).and(delta).for_each(|m, v, &g, delta| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / corr1;
                let v_hat = *v / corr2;
                *delta = -cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            });
        }

        let mut dw = Array2::zeros(self.m.dw.raw_dim());
        let mut db = Array1::zeros(self.m.db.raw_dim());
        let mut dc = Array1::zeros(self.m.dc.raw_dim());
        update_block(&mut self.m.dw, &mut self.v.dw, &grad.dw, &mut dw, cfg, corr1, corr2);
        update_block(&mut self.m.db, &mut self.v.db, &grad.db, &mut db, cfg, corr1, corr2);
        update_block(&mut self.m.dc, &mut self.v.dc, &grad.dc, &mut dc, cfg, corr1, corr2);
        params.apply_update(&dw, &db, &dc);
    }
}

fn check_batches(params: &RbmParams, batches: &[&[BitConfig]]) -> Result<()> {
    for batch in batches {
        if batch.is_empty() {
            return Err(Error::invalid("gradient estimation needs a nonempty batch"));
        }
        for x in *batch {
            if x.len() != params.nx() {
                return Err(Error::dim(format!(
                    "sample of width {} for an RBM with {} visible units",
                    x.len(),
                    params.nx()
                )));
            }
        }
    }
    Ok(())
}

/// Forward-KLD descent gradient: mean over data of grad F minus mean over
/// chains of grad F. The loss itself is intractable, reported as NaN.
pub fn grad_forward_kld(
    params: &RbmParams,
    data: &[BitConfig],
    chains: &[BitConfig],
) -> Result<(f64, FreeEnergyGrad)> {
    check_batches(params, &[data, chains])?;
    let mut grad = FreeEnergyGrad::zeros(params.nx(), params.nh());
    let wd = 1.0 / data.len() as f64;
    for x in data {
        params.free_energy_grad_into(x, wd, &mut grad)?;
    }
    let wc = -1.0 / chains.len() as f64;
    for x in chains {
        params.free_energy_grad_into(x, wc, &mut grad)?;
    }
    Ok((f64::NAN, grad))
}

/// Reverse-KLD surrogate over self-samples x ~ RBM: with residual
/// r(x) = E_eff(x) - F(x) and centering constant C = mean r, the loss is
/// (1/2B) sum (r - C)^2 and the descent gradient -(1/B) sum (r - C) grad F.
pub fn grad_reverse_kld(
    params: &RbmParams,
    model: &TargetModel,
    chains: &[BitConfig],
) -> Result<(f64, FreeEnergyGrad)> {
    check_batches(params, &[chains])?;
    let b = chains.len() as f64;
    let mut residuals = Vec::with_capacity(chains.len());
    let mut grads = Vec::with_capacity(chains.len());
    for x in chains {
        let (f, g) = params.free_energy_and_grad(x)?;
        residuals.push(model.effective_energy(x)? - f);
        grads.push(g);
    }
    let center = residuals.iter().sum::<f64>() / b;
    let mut grad = FreeEnergyGrad::zeros(params.nx(), params.nh());
    let mut loss = 0.0;
    for (r, g) in residuals.iter().zip(&grads) {
        let dev = r - center;
        loss += dev * dev;
        grad.scaled_add(-dev / b, g);
    }
    loss /= 2.0 * b;
    Ok((loss, grad))
}

/// Ratio-divergence loss and descent gradient in moment form. With residual
/// r(y) = F(y) - E_eff(y), the loss over data x' and chains x is
/// mean_d[r^2] + mean_c[r^2] - 2 mean_d[r] mean_c[r], identical to the
/// pairwise mean of (r(x') - r(x))^2; the gradient is
/// 2 (mean_d[r grad F] + mean_c[r grad F]
///    - mean_c[r] mean_d[grad F] - mean_d[r] mean_c[grad F]).
pub fn grad_ratio_divergence(
    params: &RbmParams,
    model: &TargetModel,
    data: &[BitConfig],
    chains: &[BitConfig],
) -> Result<(f64, FreeEnergyGrad)> {
    check_batches(params, &[data, chains])?;
    let nx = params.nx();
    let nh = params.nh();

    struct Moments {
        mean_r: f64,
        mean_r2: f64,
        mean_grad: FreeEnergyGrad,
        mean_r_grad: FreeEnergyGrad,
    }

    let collect = |batch: &[BitConfig]| -> Result<Moments> {
        let b = batch.len() as f64;
        let mut mean_r = 0.0;
        let mut mean_r2 = 0.0;
        let mut mean_grad = FreeEnergyGrad::zeros(nx, nh);
        let mut mean_r_grad = FreeEnergyGrad::zeros(nx, nh);
        for x in batch {
            let (f, g) = params.free_energy_and_grad(x)?;
            let r = f - model.effective_energy(x)?;
            mean_r += r / b;
            mean_r2 += r * r / b;
            mean_grad.scaled_add(1.0 / b, &g);
            mean_r_grad.scaled_add(r / b, &g);
        }
        Ok(Moments { mean_r, mean_r2, mean_grad, mean_r_grad })
    };

    let d = collect(data)?;
    let c = collect(chains)?;

    let loss = d.mean_r2 + c.mean_r2 - 2.0 * d.mean_r * c.mean_r;
    let mut grad = FreeEnergyGrad::zeros(nx, nh);
    grad.scaled_add(2.0, &d.mean_r_grad);
    grad.scaled_add(2.0, &c.mean_r_grad);
    grad.scaled_add(-2.0 * c.mean_r, &d.mean_grad);
    grad.scaled_add(-2.0 * d.mean_r, &c.mean_grad);
    Ok((loss, grad))
}

/// Sum of the forward and reverse KLD descent gradients. The reported loss
/// is the reverse-KLD surrogate, the only tractable part.
pub fn grad_summation_kld(
    params: &RbmParams,
    model: &TargetModel,
    data: &[BitConfig],
    chains: &[BitConfig],
) -> Result<(f64, FreeEnergyGrad)> {
    let (_, fwd) = grad_forward_kld(params, data, chains)?;
    let (loss, mut grad) = grad_reverse_kld(params, model, chains)?;
    grad.scaled_add(1.0, &fwd);
    Ok((loss, grad))
}

/// Persistent chains: one Markov chain per training sample, initialized at
/// the training data and advanced incrementally across the whole run.
#[derive(Clone, Debug)]
pub struct PersistentChains {
    states: Vec<BitConfig>,
}

impl PersistentChains {
    pub fn from_dataset(data: &Dataset) -> Self {
        PersistentChains { states: data.samples().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BitConfig] {
        &self.states
    }

    pub fn slice(&self, start: usize, len: usize) -> &[BitConfig] {
        &self.states[start..start + len]
    }

    /// Advances chains [start, start + len) by k block Gibbs steps each,
    /// chain by chain in index order.
    pub fn advance_slice(
        &mut self,
        params: &RbmParams,
        start: usize,
        len: usize,
        k: usize,
        rng: &mut Stream,
    ) -> Result<()> {
        if start + len > self.states.len() {
            return Err(Error::invalid(format!(
                "chain slice {}..{} out of range for {} chains",
                start,
                start + len,
                self.states.len()
            )));
        }
        for state in &mut self.states[start..start + len] {
            params.block_gibbs_steps(state, k, rng)?;
        }
        Ok(())
    }

    fn truncate(&mut self, len: usize) {
        self.states.truncate(len);
    }
}

/// Settings for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub objective: Objective,
    pub seed: u64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Block Gibbs steps applied to each chain slice per update.
    pub k_gibbs: usize,
    /// Hidden layer width; defaults to the visible width.
    pub n_hidden: Option<usize>,
    pub adam: AdamConfig,
    pub weight_init_sd: f64,
    /// Epochs between metric records; also the validation cadence.
    pub eval_interval: usize,
    /// Re-initialize chains from the training data at every epoch instead
    /// of persisting them across the run.
    pub reset_chains_each_epoch: bool,
    /// Epochs between intermediate checkpoints handed to the checkpoint
    /// sink; None disables intermediate checkpoints.
    pub checkpoint_interval: Option<usize>,
}

impl TrainConfig {
    pub fn new(objective: Objective, seed: u64) -> Self {
        TrainConfig {
            objective,
            seed,
            epochs: 1000,
            minibatch: 128,
            k_gibbs: 1,
            n_hidden: None,
            adam: AdamConfig::default(),
            weight_init_sd: 0.01,
            eval_interval: 10,
            reset_chains_each_epoch: false,
            checkpoint_interval: None,
        }
    }
}

/// One row of the training metrics stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRecord {
    /// 1-based epoch the record was taken at.
    pub epoch: usize,
    /// Mean objective value over the epoch's minibatches; NaN when the
    /// objective has no tractable value (forward KLD).
    pub loss: f64,
    /// Residual score on the validation set, when one was provided.
    pub r_theta: Option<f64>,
    /// Seconds elapsed since training started.
    pub wall_secs: f64,
}

/// Trains an RBM against the target model on the given dataset.
///
/// Weights start at N(0, weight_init_sd^2) with zero biases. Each epoch
/// shuffles the data into floor(len / minibatch) batches; batch j always
/// pairs with chain slice j, so chains partition into fixed slices cycled
/// in step with the data. Metrics are recorded every `eval_interval`
/// epochs. All randomness derives from cfg.seed via the streams
/// "train/init", "train/shuffle", and "train/gibbs", making reruns
/// bit-identical.
pub fn train(
    model: &TargetModel,
    train_data: &Dataset,
    val_data: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<(RbmParams, Vec<MetricsRecord>)> {
    train_with_checkpoints(model, train_data, val_data, cfg, |_, _| Ok(()))
}

/// `train` with a sink invoked at every `checkpoint_interval`-th epoch,
/// receiving the epoch number and the parameters at that point.
pub fn train_with_checkpoints(
    model: &TargetModel,
    train_data: &Dataset,
    val_data: Option<&Dataset>,
    cfg: &TrainConfig,
    mut on_checkpoint: impl FnMut(usize, &RbmParams) -> Result<()>,
) -> Result<(RbmParams, Vec<MetricsRecord>)> {
    let nx = model.nx();
    if train_data.nx() != nx {
        return Err(Error::dim(format!(
            "training data width {} does not match target width {}",
            train_data.nx(),
            nx
        )));
    }
    if let Some(val) = val_data {
        if val.nx() != nx {
            return Err(Error::dim(format!(
                "validation data width {} does not match target width {}",
                val.nx(),
                nx
            )));
        }
        if val.is_empty() {
            return Err(Error::invalid("validation dataset is empty"));
        }
    }
    if train_data.is_empty() {
        return Err(Error::invalid("training dataset is empty"));
    }
    if cfg.minibatch == 0 || cfg.minibatch > train_data.len() {
        return Err(Error::invalid(format!(
            "minibatch of {} for a dataset of {} samples",
            cfg.minibatch,
            train_data.len()
        )));
    }
    if cfg.epochs == 0 || cfg.eval_interval == 0 || cfg.k_gibbs == 0 {
        return Err(Error::invalid(
            "epochs, eval_interval, and k_gibbs must be positive",
        ));
    }
    let nh = cfg.n_hidden.unwrap_or(nx);
    if nh == 0 {
        return Err(Error::invalid("hidden layer must have at least one unit"));
    }

    let mut init_rng = stream(cfg.seed, "train/init");
    let mut shuffle_rng = stream(cfg.seed, "train/shuffle");
    let mut gibbs_rng = stream(cfg.seed, "train/gibbs");

    let mut params = RbmParams::random_init(nx, nh, cfg.weight_init_sd, &mut init_rng)?;
    let mut adam = AdamState::new(nx, nh);

    let n_batches = train_data.len() / cfg.minibatch;
    let used = n_batches * cfg.minibatch;
    let mut chains = PersistentChains::from_dataset(train_data);
    chains.truncate(used);

    let mut indices: Vec<usize> = (0..train_data.len()).collect();
    let mut records = Vec::new();
    let started = Instant::now();

    for epoch in 1..=cfg.epochs {
        if cfg.reset_chains_each_epoch {
            chains = PersistentChains::from_dataset(train_data);
            chains.truncate(used);
        }
        use rand::seq::SliceRandom;
        indices.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for batch in 0..n_batches {
            let start = batch * cfg.minibatch;
            let data_batch: Vec<BitConfig> = indices[start..start + cfg.minibatch]
                .iter()
                .map(|&i| train_data.sample(i).clone())
                .collect();
            chains.advance_slice(&params, start, cfg.minibatch, cfg.k_gibbs, &mut gibbs_rng)?;
            let chain_batch = chains.slice(start, cfg.minibatch);

            let (loss, grad) = match cfg.objective {
                Objective::ForwardKld => grad_forward_kld(&params, &data_batch, chain_batch)?,
                Objective::ReverseKld => grad_reverse_kld(&params, model, chain_batch)?,
                Objective::SummationKld => {
                    grad_summation_kld(&params, model, &data_batch, chain_batch)?
                }
                Objective::RatioDivergence => {
                    grad_ratio_divergence(&params, model, &data_batch, chain_batch)?
                }
            };
            adam.step(&mut params, &grad, &cfg.adam);
            loss_sum += loss;
        }

        if epoch % cfg.eval_interval == 0 {
            let r = match val_data {
                Some(val) => Some(r_theta(&params, model, val.samples())?),
                None => None,
            };
            records.push(MetricsRecord {
                epoch,
                loss: loss_sum / n_batches as f64,
                r_theta: r,
                wall_secs: started.elapsed().as_secs_f64(),
            });
        }
        if let Some(interval) = cfg.checkpoint_interval {
            if interval > 0 && epoch % interval == 0 {
                on_checkpoint(epoch, &params)?;
            }
        }
    }

    Ok((params, records))
}

/// Draws `count` samples from the RBM by running `steps` block Gibbs steps
/// from initial states taken from `init` in order (cycling if count exceeds
/// the dataset). Samples are generated one at a time in index order.
pub fn generate_samples(
    params: &RbmParams,
    init: &Dataset,
    count: usize,
    steps: usize,
    rng: &mut Stream,
) -> Result<Vec<BitConfig>> {
    if init.is_empty() {
        return Err(Error::invalid("sample initialization dataset is empty"));
    }
    if init.nx() != params.nx() {
        return Err(Error::dim(format!(
            "initialization width {} for an RBM with {} visible units",
            init.nx(),
            params.nx()
        )));
    }
    if count == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut state = init.sample(k % init.len()).clone();
        params.block_gibbs_steps(&mut state, steps, rng)?;
        out.push(state);
    }
    Ok(out)
}
