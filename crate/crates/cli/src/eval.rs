//! `eval`: score a trained checkpoint on a point cloud and export the
//! metric report, the latent embedding, and the connectivity diagrams
//! behind the topology score.

use crate::manifest::{git_describe, RunManifest};
use clap::{Args, ValueEnum};
use mmae::datasets::{load_csv, save_csv, PointCloud};
use mmae::linalg::pairwise_distances;
use mmae::metrics::{evaluate_model, MetricConfig};
use mmae::tda::h0_diagram;
use mmae::train::{encode, Checkpoint};
use mmae::Result;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

/// Which space grounds the comparison distances.
#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Space {
    /// Raw input coordinates.
    Input,
    /// The checkpoint's reference embedding, mapped out-of-sample.
    Reference,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Point-cloud CSV to score on.
    #[arg(long)]
    pub data: PathBuf,
    /// The CSV has no trailing label column.
    #[arg(long)]
    pub no_labels: bool,
    #[arg(long, value_enum, default_value_t = Space::Input)]
    pub space: Space,
    /// Kernel bandwidths for the density divergence.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1])]
    pub kl_sigmas: Vec<f64>,
    /// Neighborhood sizes for trustworthiness and continuity; sizes too
    /// large for the data are skipped.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 50, 100])]
    pub trust_ks: Vec<usize>,
    /// Sampled triples for the distance-ordering score.
    #[arg(long, default_value_t = 20_000)]
    pub ta_triplets: usize,
    #[arg(long, default_value_t = 0)]
    pub ta_seed: u64,
    /// Order of the diagram Wasserstein distance.
    #[arg(long, default_value_t = 1.0)]
    pub w0_order: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let start = Instant::now();
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let cloud = load_csv(&args.data, !args.no_labels)?;
    let base_points = match args.space {
        Space::Input => cloud.points.clone(),
        Space::Reference => checkpoint.reference.transform(&cloud.points)?,
    };
    let base = pairwise_distances(&base_points)?;
    let metric_cfg = MetricConfig {
        kl_sigmas: args.kl_sigmas.clone(),
        trust_ks: args.trust_ks.clone(),
        ta_triplets: args.ta_triplets,
        ta_seed: args.ta_seed,
        w0_order: args.w0_order,
    };
    let report = evaluate_model(&checkpoint.params, &cloud.points, &base, &metric_cfg)?;
    let latent = encode(&checkpoint.params, &cloud.points)?;
    let latent_distances = pairwise_distances(&latent)?;

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("metrics.json"), report.to_json())?;
    save_csv(
        &PointCloud::new(latent, cloud.labels.clone())?,
        &args.out.join("latent.csv"),
    )?;
    h0_diagram(&base).save_csv(&args.out.join("base_diagram.csv"))?;
    h0_diagram(&latent_distances).save_csv(&args.out.join("latent_diagram.csv"))?;

    RunManifest {
        command: "eval".into(),
        seed: args.ta_seed,
        git: git_describe(),
        config: serde_json::json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "data": args.data.display().to_string(),
            "space": match args.space {
                Space::Input => "input",
                Space::Reference => "reference",
            },
            "kl_sigmas": args.kl_sigmas,
            "trust_ks": args.trust_ks,
            "ta_triplets": args.ta_triplets,
            "ta_seed": args.ta_seed,
            "w0_order": args.w0_order,
        }),
        outputs: vec![
            "metrics.json".into(),
            "latent.csv".into(),
            "base_diagram.csv".into(),
            "latent_diagram.csv".into(),
        ],
        seconds: start.elapsed().as_secs_f64(),
        epoch_seconds: vec![],
    }
    .save(&args.out.join("manifest.json"))?;

    print!("{}", report.to_json());
    Ok(())
}
