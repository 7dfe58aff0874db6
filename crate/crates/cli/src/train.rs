//! `train`: fit an autoencoder from a JSON run configuration and write
//! the run directory — split data, checkpoint, loss history, and the
//! latent embedding of the full input cloud.

use crate::config::{build_reference, RunConfig};
use crate::manifest::{git_describe, RunManifest};
use clap::Args;
use mmae::datasets::{load_csv, save_csv, split, PointCloud};
use mmae::train::{encode, fit_with_callback, history_to_csv, resume_with_callback, Checkpoint};
use mmae::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from this checkpoint instead of initializing fresh. The
    /// config's training section must match the one stored in the
    /// checkpoint, which governs the resumed run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = RunConfig::load(&args.config)?;
    let cloud = load_csv(Path::new(&cfg.data), cfg.has_labels)?;
    let (train_cloud, test_cloud) = if cfg.test_fraction > 0.0 {
        let (tr, te) = split(&cloud, cfg.test_fraction, cfg.effective_split_seed())?;
        (tr, Some(te))
    } else {
        (cloud.clone(), None)
    };

    let mut epoch_seconds: Vec<f64> = Vec::new();
    let mut tick = Instant::now();
    let (reference, result) = match &args.resume {
        None => {
            let reference = build_reference(&cfg.train.reference, &train_cloud)?;
            let result = fit_with_callback(&cfg.train, &train_cloud, &reference, |_| {
                epoch_seconds.push(tick.elapsed().as_secs_f64());
                tick = Instant::now();
            })?;
            (reference, result)
        }
        Some(path) => {
            let checkpoint = Checkpoint::load(path)?;
            if checkpoint.config != cfg.train {
                return Err(Error::input(
                    "the run config's training section disagrees with the checkpoint; \
                     a resumed run is governed by the stored configuration",
                ));
            }
            let reference = checkpoint.reference.clone();
            let result = resume_with_callback(checkpoint, &train_cloud, |_| {
                epoch_seconds.push(tick.elapsed().as_secs_f64());
                tick = Instant::now();
            })?;
            (reference, result)
        }
    };

    let latent = encode(&result.params, &cloud.points)?;
    let latent_cloud = PointCloud::new(latent, cloud.labels.clone())?;

    fs::create_dir_all(&args.out)?;
    let mut outputs: Vec<String> = Vec::new();
    save_csv(&train_cloud, &args.out.join("train.csv"))?;
    outputs.push("train.csv".into());
    if let Some(te) = &test_cloud {
        save_csv(te, &args.out.join("test.csv"))?;
        outputs.push("test.csv".into());
    }
    Checkpoint::new(cfg.train.clone(), reference, &result).save(&args.out.join("checkpoint.json"))?;
    outputs.push("checkpoint.json".into());
    fs::write(args.out.join("history.csv"), history_to_csv(&result.history))?;
    outputs.push("history.csv".into());
    save_csv(&latent_cloud, &args.out.join("latent.csv"))?;
    outputs.push("latent.csv".into());

    RunManifest {
        command: "train".into(),
        seed: cfg.train.seed,
        git: git_describe(),
        config: serde_json::to_value(&cfg)
            .map_err(|e| Error::parse(format!("echoing run config: {e}")))?,
        outputs,
        seconds: start.elapsed().as_secs_f64(),
        epoch_seconds,
    }
    .save(&args.out.join("manifest.json"))?;

    match result.history.last() {
        Some(r) => println!(
            "trained {} epochs; final loss {:.6e} (recon {:.6e}) -> {}",
            result.epochs_done,
            r.total,
            r.recon,
            args.out.display()
        ),
        None => println!("no epochs to run -> {}", args.out.display()),
    }
    Ok(())
}
