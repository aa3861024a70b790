//! Experiment configuration: TOML schema, named presets, and model
//! construction from config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pt::PtConfig;
use crate::rng::stream;
use crate::target::{gset::read_gset_file, TargetModel};
use crate::training::{AdamConfig, Objective, TrainConfig};

/// Model section of an experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// "ising2d", "sk", "mis", or "maxcut".
    pub kind: String,
    /// Inverse temperature of the target distribution.
    pub beta: f64,
    /// Lattice side for ising2d.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Uniform coupling for ising2d.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// Node or spin count for sk and mis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Regular-graph degree for mis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Conflict penalty weight for mis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Gset file for maxcut, either a bare name resolved against the Gset
    /// directory or an explicit path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gset: Option<String>,
}

impl ModelConfig {
    fn require<T: Copy>(opt: Option<T>, what: &str, kind: &str) -> Result<T> {
        opt.ok_or_else(|| {
            Error::invalid(format!("model kind {:?} requires the {:?} field", kind, what))
        })
    }

    /// Builds the target model. Randomized structure (SK couplings, MIS
    /// graphs) is derived deterministically from the master seed.
    /// `gset_dir` resolves bare Gset names for maxcut models.
    pub fn build(&self, master_seed: u64, gset_dir: Option<&Path>) -> Result<TargetModel> {
        match self.kind.as_str() {
            "ising2d" => {
                let l = Self::require(self.l, "l", "ising2d")?;
                TargetModel::ising2d(l, self.j.unwrap_or(1.0), self.beta)
            }
            "sk" => {
                let n = Self::require(self.n, "n", "sk")?;
                let mut rng = stream(master_seed, "model/sk-couplings");
                TargetModel::sk_random(n, self.beta, &mut rng)
            }
            "mis" => {
                let n = Self::require(self.n, "n", "mis")?;
                let degree = Self::require(self.degree, "degree", "mis")?;
                let mut rng = stream(master_seed, "model/mis-graph");
                TargetModel::mis_random_regular(
                    n,
                    degree,
                    self.alpha.unwrap_or(2.0),
                    self.beta,
                    &mut rng,
                )
            }
            "maxcut" => {
                let name = self.gset.as_ref().ok_or_else(|| {
                    Error::invalid("model kind \"maxcut\" requires the \"gset\" field")
                })?;
                let path = resolve_gset_path(name, gset_dir)?;
                let graph = read_gset_file(&path)?;
                TargetModel::maxcut_from_gset(&graph, self.beta)
            }
            other => Err(Error::invalid(format!(
                "unknown model kind {:?}; expected ising2d, sk, mis, or maxcut",
                other
            ))),
        }
    }
}

/// Resolves a Gset reference: an existing path is used as-is, otherwise the
/// name is looked up inside `gset_dir` (flag) or `$RDRBM_GSET_DIR`.
pub fn resolve_gset_path(name: &str, gset_dir: Option<&Path>) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    let dir = match gset_dir {
        Some(d) => d.to_path_buf(),
        None => match std::env::var_os("RDRBM_GSET_DIR") {
            Some(d) => PathBuf::from(d),
            None => {
                return Err(Error::invalid(format!(
                    "gset {:?} is not a file and no Gset directory is set \
                     (pass --gset-dir or set RDRBM_GSET_DIR)",
                    name
                )))
            }
        },
    };
    let joined = dir.join(name);
    if joined.is_file() {
        Ok(joined)
    } else {
        Err(Error::invalid(format!(
            "gset file {:?} not found",
            joined.display()
        )))
    }
}

/// Training section of an experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSection {
    pub epochs: usize,
    pub minibatch: usize,
    pub k_gibbs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub weight_init_sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_hidden: Option<usize>,
    pub eval_interval: usize,
    pub n_seeds: usize,
    pub reset_chains_each_epoch: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            epochs: 1000,
            minibatch: 128,
            k_gibbs: 1,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            weight_init_sd: 0.01,
            n_hidden: None,
            eval_interval: 10,
            n_seeds: 5,
            reset_chains_each_epoch: false,
        }
    }
}

impl TrainSection {
    /// Expands into the library-level training configuration for one run.
    pub fn to_train_config(&self, objective: Objective, seed: u64) -> TrainConfig {
        TrainConfig {
            objective,
            seed,
            epochs: self.epochs,
            minibatch: self.minibatch,
            k_gibbs: self.k_gibbs,
            n_hidden: self.n_hidden,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                epsilon: self.adam_epsilon,
            },
            weight_init_sd: self.weight_init_sd,
            eval_interval: self.eval_interval,
            reset_chains_each_epoch: self.reset_chains_each_epoch,
            checkpoint_interval: None,
        }
    }
}

/// Sampling section: how model samples are drawn for evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSection {
    pub count: usize,
    pub steps: usize,
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection { count: 16_384, steps: 100 }
    }
}

/// Evaluation section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSection {
    /// Subsample size for Hamming-distance histograms.
    pub hamming_subsample: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { hamming_subsample: 1000 }
    }
}

/// A complete experiment description, the unit of the TOML config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub master_seed: u64,
    pub model: ModelConfig,
    pub pt: PtConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub eval: EvalSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config parse failed: {}", e)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::from_toml(&text)
    }

    /// Structural validation that does not require building the model.
    pub fn validate(&self) -> Result<()> {
        self.pt.validate()?;
        if (self.pt.beta_max - self.model.beta).abs() > 1e-12 {
            return Err(Error::Infeasible(format!(
                "ladder top {} must equal model beta {}",
                self.pt.beta_max, self.model.beta
            )));
        }
        if self.train.n_seeds == 0 {
            return Err(Error::invalid("n_seeds must be positive"));
        }
        if self.train.minibatch > self.pt.train_size {
            return Err(Error::Infeasible(format!(
                "minibatch {} exceeds the training set size {}",
                self.train.minibatch, self.pt.train_size
            )));
        }
        if self.eval.hamming_subsample < 2 {
            return Err(Error::invalid("hamming_subsample must be at least 2"));
        }
        Ok(())
    }
}

/// Names of the built-in presets, full-scale first.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "ising-144",
        "sk-144",
        "mis-250",
        "gset-g1",
        "gset-g6",
        "gset-g14",
        "gset-g18",
        "ising-desk",
        "sk-desk",
        "mis-desk",
    ]
}

fn paper_pt(n_replicas: usize, beta_min: f64, beta_max: f64) -> PtConfig {
    PtConfig {
        n_replicas,
        beta_min,
        beta_max,
        total_mcs: 1_000_000,
        swap_interval_mcs: 1,
        record_interval_mcs: 10,
        burn_in_records: 10_000,
        train_size: 16_384,
        val_size: 1_024,
    }
}

fn desk_pt(n_replicas: usize, beta_min: f64, beta_max: f64) -> PtConfig {
    PtConfig {
        n_replicas,
        beta_min,
        beta_max,
        total_mcs: 20_000,
        swap_interval_mcs: 1,
        record_interval_mcs: 10,
        burn_in_records: 200,
        train_size: 1_024,
        val_size: 256,
    }
}

fn desk_train() -> TrainSection {
    TrainSection {
        epochs: 200,
        minibatch: 64,
        n_seeds: 2,
        ..TrainSection::default()
    }
}

fn desk_sample() -> SampleSection {
    SampleSection { count: 1_024, steps: 50 }
}

fn desk_eval() -> EvalSection {
    EvalSection { hamming_subsample: 200 }
}

/// Returns a built-in preset by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |name: &str, model: ModelConfig, pt: PtConfig| ExperimentConfig {
        name: name.to_string(),
        master_seed: 42,
        model,
        pt,
        train: TrainSection::default(),
        sample: SampleSection::default(),
        eval: EvalSection::default(),
    };
    let ising = |l: usize, beta: f64| ModelConfig {
        kind: "ising2d".into(),
        beta,
        l: Some(l),
        j: Some(1.0),
        n: None,
        degree: None,
        alpha: None,
        gset: None,
    };
    let maxcut = |file: &str, beta: f64| ModelConfig {
        kind: "maxcut".into(),
        beta,
        l: None,
        j: None,
        n: None,
        degree: None,
        alpha: None,
        gset: Some(file.to_string()),
    };

    let cfg = match name {
        "ising-144" => base(name, ising(12, 0.5), paper_pt(4, 0.25, 0.5)),
        "sk-144" => base(
            name,
            ModelConfig {
                kind: "sk".into(),
                beta: 2.0,
                l: None,
                j: None,
                n: Some(144),
                degree: None,
                alpha: None,
                gset: None,
            },
            paper_pt(8, 0.5, 2.0),
        ),
        "mis-250" => base(
            name,
            ModelConfig {
                kind: "mis".into(),
                beta: 2.0,
                l: None,
                j: None,
                n: Some(250),
                degree: Some(20),
                alpha: Some(2.0),
                gset: None,
            },
            paper_pt(40, 0.1, 2.0),
        ),
        "gset-g1" => base(name, maxcut("G1", 1.0), paper_pt(16, 0.25, 1.0)),
        "gset-g6" => base(name, maxcut("G6", 2.0), paper_pt(16, 0.25, 2.0)),
        "gset-g14" => base(name, maxcut("G14", 4.0), paper_pt(32, 0.25, 4.0)),
        "gset-g18" => base(name, maxcut("G18", 2.5), paper_pt(32, 0.25, 2.5)),
        "ising-desk" => {
            let mut cfg = base(name, ising(4, 0.5), desk_pt(4, 0.25, 0.5));
            cfg.train = desk_train();
            cfg.sample = desk_sample();
            cfg.eval = desk_eval();
            cfg
        }
        "sk-desk" => {
            let mut cfg = base(
                name,
                ModelConfig {
                    kind: "sk".into(),
                    beta: 2.0,
                    l: None,
                    j: None,
                    n: Some(16),
                    degree: None,
                    alpha: None,
                    gset: None,
                },
                desk_pt(8, 0.5, 2.0),
            );
            cfg.train = desk_train();
            cfg.sample = desk_sample();
            cfg.eval = desk_eval();
            cfg
        }
        "mis-desk" => {
            let mut cfg = base(
                name,
                ModelConfig {
                    kind: "mis".into(),
                    beta: 2.0,
                    l: None,
                    j: None,
                    n: Some(30),
                    degree: Some(4),
                    alpha: Some(2.0),
                    gset: None,
                },
                desk_pt(8, 0.1, 2.0),
            );
            cfg.train = desk_train();
            cfg.sample = desk_sample();
            cfg.eval = desk_eval();
            cfg
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown preset {:?}; available: {}",
                other,
                preset_names().join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in preset_names() {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("preset {}: {}", name, e));
            assert_eq!(&cfg.name, name);
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn non_gset_presets_build_models() {
        for name in ["ising-desk", "sk-desk", "mis-desk"] {
            let cfg = preset(name).unwrap();
            let model = cfg.model.build(cfg.master_seed, None).unwrap();
            assert_eq!(model.beta(), cfg.model.beta);
            let again = cfg.model.build(cfg.master_seed, None).unwrap();
            assert_eq!(model, again);
        }
    }

    #[test]
    fn full_scale_presets_pin_expected_budgets() {
        let cfg = preset("ising-144").unwrap();
        assert_eq!(cfg.pt.total_records(), 100_000);
        assert_eq!(cfg.pt.train_size, 16_384);
        assert_eq!(cfg.pt.val_size, 1_024);
        assert_eq!(cfg.pt.n_replicas, 4);
        assert_eq!(cfg.train.epochs, 1000);
        assert_eq!(cfg.train.minibatch, 128);
        assert_eq!(cfg.sample.count, 16_384);
        assert_eq!(cfg.sample.steps, 100);
        assert_eq!(cfg.train.n_seeds, 5);

        assert_eq!(preset("sk-144").unwrap().pt.n_replicas, 8);
        assert_eq!(preset("mis-250").unwrap().pt.n_replicas, 40);
        assert_eq!(preset("gset-g14").unwrap().pt.n_replicas, 32);
    }

    #[test]
    fn toml_roundtrip_preserves_config() {
        for name in preset_names() {
            let cfg = preset(name).unwrap();
            let text = cfg.to_toml();
            let parsed = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(parsed, cfg, "preset {}", name);
        }
    }

    #[test]
    fn validation_catches_inconsistencies() {
        let mut cfg = preset("ising-desk").unwrap();
        cfg.model.beta = 0.7;
        assert!(cfg.validate().is_err());

        let mut cfg = preset("ising-desk").unwrap();
        cfg.train.minibatch = 100_000;
        assert!(cfg.validate().is_err());

        let mut cfg = preset("ising-desk").unwrap();
        cfg.pt.burn_in_records = 100_000_000;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn model_config_errors_name_missing_fields() {
        let cfg = ModelConfig {
            kind: "ising2d".into(),
            beta: 0.5,
            l: None,
            j: None,
            n: None,
            degree: None,
            alpha: None,
            gset: None,
        };
        let err = cfg.build(1, None).unwrap_err();
        assert!(err.to_string().contains("\"l\""), "{}", err);

        let cfg = ModelConfig { kind: "warp".into(), ..cfg };
        assert!(cfg.build(1, None).is_err());
    }

    #[test]
    fn train_section_expands_to_train_config() {
        let section = TrainSection::default();
        let tc = section.to_train_config(Objective::RatioDivergence, 7);
        assert_eq!(tc.seed, 7);
        assert_eq!(tc.epochs, 1000);
        assert_eq!(tc.adam.learning_rate, 1e-3);
        assert_eq!(tc.adam.beta1, 0.9);
        assert_eq!(tc.adam.beta2, 0.999);
        assert_eq!(tc.adam.epsilon, 1e-8);
    }
}
