//! Command-line interface: dataset generation, training, sampling,
//! evaluation, and reporting over a self-contained run directory.
//!
//! A run directory is created by `generate-data` and then shared by the
//! other commands. It holds `config.toml` (the resolved configuration),
//! `model.txt` (the canonical target model), `train.bin` / `val.bin`
//! datasets, one checkpoint and metrics CSV per (objective, seed), sample
//! files, an `eval/` directory with the evaluation artifacts, and one
//! manifest JSON per command listing the artifacts it wrote with their
//! SHA-256 hashes.
//!
//! When `SOURCE_DATE_EPOCH` is set, manifest timestamps are taken from it
//! and wall-clock columns are written as zero, making reruns with the same
//! configuration and seed byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{preset, preset_names, ExperimentConfig};
use crate::dataset::{write_atomic, Dataset, DatasetMeta};
use crate::error::Result as CrateResult;
use crate::eval::{
    hamming_histogram, pca_fit, r_theta, wasserstein_1d, EmpiricalEnergyDist,
};
use crate::pt::generate_dataset;
use crate::rbm::RbmParams;
use crate::rng::stream;
use crate::target::TargetModel;
use crate::training::{generate_samples, train_with_checkpoints, MetricsRecord, Objective};

#[derive(Parser)]
#[command(
    name = "rdrbm",
    version,
    about = "Train RBMs against discrete target energy functions and evaluate them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw train/validation datasets from the target via replica exchange
    GenerateData(GenerateArgs),
    /// Train one RBM for a given objective and seed
    Train(TrainArgs),
    /// Draw samples from a trained RBM by block Gibbs sampling
    Sample(SampleArgs),
    /// Compute Wasserstein, residual-score, Hamming, and PCA artifacts
    Evaluate(EvaluateArgs),
    /// Print the aggregated evaluation table for a run
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in preset name
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment TOML file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed from the preset or config
    #[arg(long)]
    seed: Option<u64>,
    /// Directory containing Gset graph files
    #[arg(long)]
    gset_dir: Option<PathBuf>,
    /// Run directory to create (default: $RDRBM_OUT/<name> or runs/<name>)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Run directory created by generate-data
    #[arg(long)]
    run_dir: PathBuf,
    /// forward-kld, reverse-kld, summation-kld, or ratio-divergence
    #[arg(long)]
    objective: String,
    /// Training seed (independent runs use distinct seeds)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    minibatch: Option<usize>,
    #[arg(long)]
    k_gibbs: Option<usize>,
    #[arg(long)]
    eval_interval: Option<usize>,
    /// Hidden layer width (default: visible width)
    #[arg(long)]
    hidden: Option<usize>,
    /// Write an intermediate checkpoint every N epochs
    #[arg(long)]
    checkpoint_interval: Option<usize>,
    /// Re-initialize persistent chains from the data each epoch
    #[arg(long, default_value_t = false)]
    reset_chains: bool,
}

#[derive(Args)]
struct SampleArgs {
    /// Run directory holding the checkpoint and datasets
    #[arg(long, required_unless_present = "checkpoint")]
    run_dir: Option<PathBuf>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit checkpoint file (bypasses the run directory layout)
    #[arg(long, requires_all = ["init_data", "out_file"])]
    checkpoint: Option<PathBuf>,
    /// Dataset providing initial chain states in explicit mode
    #[arg(long)]
    init_data: Option<PathBuf>,
    /// Output sample file in explicit mode
    #[arg(long)]
    out_file: Option<PathBuf>,
    /// Number of samples (default: the config sample.count)
    #[arg(long)]
    count: Option<usize>,
    /// Block Gibbs steps per sample (default: the config sample.steps)
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    run_dir: PathBuf,
    /// Comma-separated objectives (default: all four)
    #[arg(long)]
    objectives: Option<String>,
    /// Comma-separated seeds (default: 0..n_seeds from the config)
    #[arg(long)]
    seeds: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    run_dir: PathBuf,
}

/// Binary entry point: parse, dispatch, and map any failure to a one-line
/// `error:` message with exit code 1.
pub fn run() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {:#}", err);
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenerateData(args) => cmd_generate_data(args),
        Command::Train(args) => cmd_train(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// True when outputs must be reproducible byte-for-byte.
fn deterministic_mode() -> bool {
    std::env::var_os("SOURCE_DATE_EPOCH").is_some()
}

fn created_unix() -> u64 {
    if let Some(epoch) = std::env::var_os("SOURCE_DATE_EPOCH") {
        if let Some(parsed) = epoch.to_str().and_then(|s| s.parse().ok()) {
            return parsed;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Serialize)]
struct Artifact {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    created_unix: u64,
    master_seed: u64,
    config: serde_json::Value,
    artifacts: Vec<Artifact>,
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `<run_dir>/manifest-<tag>.json` covering the given artifacts
/// (paths relative to the run directory), sorted by path.
fn write_manifest(
    run_dir: &Path,
    tag: &str,
    command: String,
    master_seed: u64,
    config: serde_json::Value,
    artifacts: &[PathBuf],
) -> anyhow::Result<()> {
    let mut entries = Vec::with_capacity(artifacts.len());
    for rel in artifacts {
        entries.push(Artifact {
            path: rel.to_string_lossy().into_owned(),
            sha256: sha256_file(&run_dir.join(rel))?,
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = RunManifest {
        tool: "rdrbm",
        version: env!("CARGO_PKG_VERSION"),
        command,
        created_unix: created_unix(),
        master_seed,
        config,
        artifacts: entries,
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    let path = run_dir.join(format!("manifest-{}.json", tag));
    write_atomic(&path, json.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn save_params_atomic(params: &RbmParams, path: &Path) -> CrateResult<()> {
    let tmp = path.with_extension("rbm.tmp");
    params.save(&tmp)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads the resolved config and canonical model from a run directory.
fn load_run(run_dir: &Path) -> anyhow::Result<(ExperimentConfig, TargetModel)> {
    let cfg_path = run_dir.join("config.toml");
    let cfg = ExperimentConfig::load(&cfg_path)
        .with_context(|| format!("loading {}", cfg_path.display()))?;
    let model_path = run_dir.join("model.txt");
    let model = TargetModel::load(&model_path)
        .with_context(|| format!("loading {}", model_path.display()))?;
    Ok((cfg, model))
}

fn load_dataset(path: &Path) -> anyhow::Result<Dataset> {
    Dataset::load(path).with_context(|| format!("loading {}", path.display()))
}

fn checkpoint_name(objective: Objective, seed: u64) -> String {
    format!("rbm_{}_seed{}.rbm", objective.name(), seed)
}

fn metrics_name(objective: Objective, seed: u64) -> String {
    format!("metrics_{}_seed{}.csv", objective.name(), seed)
}

fn samples_name(objective: Objective, seed: u64) -> String {
    format!("samples_{}_seed{}.bin", objective.name(), seed)
}

fn cmd_generate_data(args: GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => ExperimentConfig::load(path)
            .with_context(|| format!("loading {}", path.display()))?,
        (None, None) => bail!(
            "one of --preset or --config is required; presets: {}",
            preset_names().join(", ")
        ),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;

    let model = cfg.model.build(cfg.master_seed, args.gset_dir.as_deref())?;

    let run_dir = match args.out {
        Some(dir) => dir,
        None => match std::env::var_os("RDRBM_OUT") {
            Some(root) => PathBuf::from(root).join(&cfg.name),
            None => PathBuf::from("runs").join(&cfg.name),
        },
    };
    std::fs::create_dir_all(&run_dir)
        .with_context(|| format!("creating {}", run_dir.display()))?;

    write_atomic(&run_dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    write_atomic(&run_dir.join("model.txt"), model.canonical_text().as_bytes())?;

    let (train, val) = generate_dataset(&model, &cfg.pt, cfg.master_seed)?;
    train.save(&run_dir.join("train.bin"))?;
    val.save(&run_dir.join("val.bin"))?;
    println!(
        "generated {} training and {} validation samples over {} bits",
        train.len(),
        val.len(),
        train.nx()
    );

    write_manifest(
        &run_dir,
        "generate",
        "generate-data".into(),
        cfg.master_seed,
        serde_json::to_value(&cfg)?,
        &[
            PathBuf::from("config.toml"),
            PathBuf::from("model.txt"),
            PathBuf::from("train.bin"),
            PathBuf::from("train.bin.meta.json"),
            PathBuf::from("val.bin"),
            PathBuf::from("val.bin.meta.json"),
        ],
    )
}

/// Renders the metrics stream as CSV. In deterministic mode the wall-clock
/// column is written as zero so reruns are byte-identical.
fn metrics_csv(records: &[MetricsRecord]) -> String {
    let zero_wall = deterministic_mode();
    let mut out = String::from("epoch,loss,r_theta,wall_secs\n");
    for r in records {
        let wall = if zero_wall { 0.0 } else { r.wall_secs };
        let r_theta = r.r_theta.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.epoch, r.loss, r_theta, wall).unwrap();
    }
    out
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let (cfg, model) = load_run(&args.run_dir)?;
    let objective = Objective::from_str(&args.objective)?;
    let train_data = load_dataset(&args.run_dir.join("train.bin"))?;
    let val_data = load_dataset(&args.run_dir.join("val.bin"))?;

    let mut section = cfg.train.clone();
    if let Some(v) = args.epochs {
        section.epochs = v;
    }
    if let Some(v) = args.minibatch {
        section.minibatch = v;
    }
    if let Some(v) = args.k_gibbs {
        section.k_gibbs = v;
    }
    if let Some(v) = args.eval_interval {
        section.eval_interval = v;
    }
    if let Some(v) = args.hidden {
        section.n_hidden = Some(v);
    }
    if args.reset_chains {
        section.reset_chains_each_epoch = true;
    }
    let mut train_cfg = section.to_train_config(objective, args.seed);
    train_cfg.checkpoint_interval = args.checkpoint_interval;

    let run_dir = args.run_dir.clone();
    let mut intermediate: Vec<PathBuf> = Vec::new();
    let (params, records) = train_with_checkpoints(
        &model,
        &train_data,
        Some(&val_data),
        &train_cfg,
        |epoch, params| {
            let name = format!("rbm_{}_seed{}_epoch{}.rbm", objective.name(), args.seed, epoch);
            save_params_atomic(params, &run_dir.join(&name))?;
            intermediate.push(PathBuf::from(name));
            Ok(())
        },
    )?;

    let ckpt = checkpoint_name(objective, args.seed);
    save_params_atomic(&params, &args.run_dir.join(&ckpt))?;
    let metrics = metrics_name(objective, args.seed);
    write_atomic(&args.run_dir.join(&metrics), metrics_csv(&records).as_bytes())?;

    if let Some(last) = records.last() {
        match last.r_theta {
            Some(r) => println!(
                "trained {} seed {}: final R(theta) = {}",
                objective.name(),
                args.seed,
                r
            ),
            None => println!("trained {} seed {}", objective.name(), args.seed),
        }
    }

    let mut artifacts = vec![PathBuf::from(ckpt), PathBuf::from(metrics)];
    artifacts.extend(intermediate);
    write_manifest(
        &args.run_dir,
        &format!("train-{}-seed{}", objective.name(), args.seed),
        format!("train --objective {} --seed {}", objective.name(), args.seed),
        cfg.master_seed,
        serde_json::json!({ "train": section, "objective": objective, "seed": args.seed }),
        &artifacts,
    )
}

fn cmd_sample(args: SampleArgs) -> anyhow::Result<()> {
    if let Some(ckpt_path) = &args.checkpoint {
        // Explicit mode: files given directly, no run-directory layout.
        let params = RbmParams::load(ckpt_path)
            .with_context(|| format!("loading {}", ckpt_path.display()))?;
        let init = load_dataset(args.init_data.as_ref().expect("clap enforces"))?;
        let out_file = args.out_file.as_ref().expect("clap enforces");
        let count = args.count.unwrap_or(init.len());
        let steps = args.steps.unwrap_or(100);
        let mut rng = stream(args.seed, "sample");
        let samples = generate_samples(&params, &init, count, steps, &mut rng)?;
        let meta = DatasetMeta {
            source: "block-gibbs".into(),
            model_hash: init.meta.model_hash.clone(),
            model_text: None,
            seed: Some(args.seed),
            config: Some(serde_json::json!({
                "steps": steps,
                "count": count,
                "checkpoint_sha256": sha256_file(ckpt_path)?,
            })),
        };
        Dataset::new(params.nx(), samples, meta)?.save(out_file)?;
        println!("wrote {}", out_file.display());
        return Ok(());
    }

    let run_dir = args.run_dir.as_ref().expect("clap enforces");
    let objective = Objective::from_str(
        args.objective
            .as_deref()
            .ok_or_else(|| anyhow!("--objective is required with --run-dir"))?,
    )?;
    let (cfg, model) = load_run(run_dir)?;
    let ckpt_path = run_dir.join(checkpoint_name(objective, args.seed));
    let params = RbmParams::load(&ckpt_path)
        .with_context(|| format!("loading {}", ckpt_path.display()))?;
    let init = load_dataset(&run_dir.join("train.bin"))?;
    let count = args.count.unwrap_or(cfg.sample.count);
    let steps = args.steps.unwrap_or(cfg.sample.steps);

    let label = format!("sample/{}/{}", objective.name(), args.seed);
    let mut rng = stream(cfg.master_seed, &label);
    let samples = generate_samples(&params, &init, count, steps, &mut rng)?;
    let meta = DatasetMeta {
        source: "block-gibbs".into(),
        model_hash: Some(model.hash()),
        model_text: None,
        seed: Some(cfg.master_seed),
        config: Some(serde_json::json!({
            "steps": steps,
            "count": count,
            "objective": objective,
            "train_seed": args.seed,
            "checkpoint_sha256": sha256_file(&ckpt_path)?,
        })),
    };
    let name = samples_name(objective, args.seed);
    Dataset::new(params.nx(), samples, meta)?.save(&run_dir.join(&name))?;
    println!("wrote {}", run_dir.join(&name).display());

    write_manifest(
        run_dir,
        &format!("sample-{}-seed{}", objective.name(), args.seed),
        format!("sample --objective {} --seed {}", objective.name(), args.seed),
        cfg.master_seed,
        serde_json::json!({ "count": count, "steps": steps }),
        &[
            PathBuf::from(name.clone()),
            PathBuf::from(format!("{}.meta.json", name)),
        ],
    )
}

fn parse_objectives(arg: Option<&str>) -> anyhow::Result<Vec<Objective>> {
    match arg {
        None => Ok(Objective::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .map(|tok| Objective::from_str(tok.trim()).map_err(Into::into))
            .collect(),
    }
}

fn parse_seeds(arg: Option<&str>, n_seeds: usize) -> anyhow::Result<Vec<u64>> {
    match arg {
        None => Ok((0..n_seeds as u64).collect()),
        Some(list) => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u64>()
                    .map_err(|_| anyhow!("bad seed {:?} in --seeds", tok))
            })
            .collect(),
    }
}

/// Sample mean and standard error (sd / sqrt(n), zero for a single value).
fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn cmd_evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let (cfg, model) = load_run(&args.run_dir)?;
    let objectives = parse_objectives(args.objectives.as_deref())?;
    let seeds = parse_seeds(args.seeds.as_deref(), cfg.train.n_seeds)?;
    if seeds.is_empty() {
        bail!("no seeds to evaluate");
    }

    let train_data = load_dataset(&args.run_dir.join("train.bin"))?;
    let val_data = load_dataset(&args.run_dir.join("val.bin"))?;
    let eval_dir = args.run_dir.join("eval");
    std::fs::create_dir_all(&eval_dir)
        .with_context(|| format!("creating {}", eval_dir.display()))?;

    let mut artifacts: Vec<PathBuf> = Vec::new();
    let mut write_eval = |name: &str, text: &str| -> anyhow::Result<()> {
        write_atomic(&eval_dir.join(name), text.as_bytes())?;
        artifacts.push(PathBuf::from("eval").join(name));
        Ok(())
    };

    let train_energy = EmpiricalEnergyDist::from_samples(&model, train_data.samples())?;
    let pca = pca_fit(train_data.samples())?;

    let projections_csv = |samples: &[crate::rbm::BitConfig]| -> anyhow::Result<String> {
        let mut out = String::from("pc1,pc2\n");
        for s in samples {
            let p = pca.project(s)?;
            writeln!(out, "{},{}", p[0], p[1]).unwrap();
        }
        Ok(out)
    };
    let hamming_csv = |samples: &[crate::rbm::BitConfig], label: &str| -> anyhow::Result<String> {
        let mut rng = stream(cfg.master_seed, &format!("eval/hamming/{}", label));
        let distances = hamming_histogram(samples, cfg.eval.hamming_subsample, &mut rng)?;
        let mut out = String::from("distance\n");
        for d in distances {
            writeln!(out, "{}", d).unwrap();
        }
        Ok(out)
    };

    write_eval("pca_train.csv", &projections_csv(train_data.samples())?)?;
    write_eval("hamming_train.csv", &hamming_csv(train_data.samples(), "train")?)?;

    let mut per_seed = String::from("objective,seed,wasserstein,r_theta\n");
    let mut collected: BTreeMap<&'static str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &objective in &objectives {
        for &seed in &seeds {
            let ckpt_path = args.run_dir.join(checkpoint_name(objective, seed));
            let params = RbmParams::load(&ckpt_path)
                .with_context(|| format!("loading {}", ckpt_path.display()))?;
            let sample_path = args.run_dir.join(samples_name(objective, seed));
            let samples = load_dataset(&sample_path)?;
            if samples.nx() != model.nx() {
                bail!(
                    "sample file {} has width {}, expected {}",
                    sample_path.display(),
                    samples.nx(),
                    model.nx()
                );
            }

            let sample_energy = EmpiricalEnergyDist::from_samples(&model, samples.samples())?;
            let w = wasserstein_1d(&train_energy, &sample_energy);
            let r = r_theta(&params, &model, val_data.samples())?;
            writeln!(per_seed, "{},{},{},{}", objective.name(), seed, w, r).unwrap();
            let entry = collected.entry(objective.name()).or_default();
            entry.0.push(w);
            entry.1.push(r);

            write_eval(
                &format!("pca_{}_seed{}.csv", objective.name(), seed),
                &projections_csv(samples.samples())?,
            )?;
            write_eval(
                &format!("hamming_{}_seed{}.csv", objective.name(), seed),
                &hamming_csv(
                    samples.samples(),
                    &format!("{}/{}", objective.name(), seed),
                )?,
            )?;
        }
    }
    write_eval("per_seed.csv", &per_seed)?;

    let mut report = String::from("objective,metric,mean,stderr,n_seeds\n");
    for &objective in &objectives {
        let (ws, rs) = &collected[objective.name()];
        let (wm, wse) = mean_stderr(ws);
        let (rm, rse) = mean_stderr(rs);
        writeln!(report, "{},wasserstein,{},{},{}", objective.name(), wm, wse, ws.len()).unwrap();
        writeln!(report, "{},r_theta,{},{},{}", objective.name(), rm, rse, rs.len()).unwrap();
    }
    write_eval("report.csv", &report)?;
    println!("evaluated {} objectives over {} seeds", objectives.len(), seeds.len());

    write_manifest(
        &args.run_dir,
        "evaluate",
        "evaluate".into(),
        cfg.master_seed,
        serde_json::json!({
            "objectives": objectives,
            "seeds": seeds,
            "hamming_subsample": cfg.eval.hamming_subsample,
        }),
        &artifacts,
    )
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<()> {
    let path = args.run_dir.join("eval").join("report.csv");
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {} (run `evaluate` first)", path.display()))?;

    struct Row {
        wasserstein: Option<(f64, f64, usize)>,
        r_theta: Option<(f64, f64, usize)>,
    }
    let mut rows: Vec<(String, Row)> = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("malformed report line {}: {:?}", lineno + 1, line);
        }
        let parse = |s: &str| -> anyhow::Result<f64> {
            s.parse().map_err(|_| anyhow!("bad number {:?} on line {}", s, lineno + 1))
        };
        let cell = (parse(fields[2])?, parse(fields[3])?, fields[4].parse::<usize>()?);
        let row = match rows.iter_mut().find(|(name, _)| name == fields[0]) {
            Some((_, row)) => row,
            None => {
                rows.push((fields[0].to_string(), Row { wasserstein: None, r_theta: None }));
                &mut rows.last_mut().unwrap().1
            }
        };
        match fields[1] {
            "wasserstein" => row.wasserstein = Some(cell),
            "r_theta" => row.r_theta = Some(cell),
            other => bail!("unknown metric {:?} on line {}", other, lineno + 1),
        }
    }
    if rows.is_empty() {
        bail!("report {} contains no data rows", path.display());
    }

    let fmt = |cell: &Option<(f64, f64, usize)>| -> String {
        match cell {
            Some((mean, stderr, n)) => format!("{:>10.4} +/- {:<8.4} (n={})", mean, stderr, n),
            None => "-".to_string(),
        }
    };
    println!("{:<16} {:<34} {:<34}", "objective", "wasserstein", "R(theta)");
    for (name, row) in &rows {
        println!("{:<16} {:<34} {:<34}", name, fmt(&row.wasserstein), fmt(&row.r_theta));
    }
    Ok(())
}
