//! `mds`: embed a point cloud with classical multidimensional scaling and
//! export the coordinates plus the spectrum diagnostics.

use crate::manifest::{git_describe, RunManifest};
use clap::Args;
use mmae::datasets::{load_csv, save_csv, PointCloud};
use mmae::fmt::g17;
use mmae::linalg::pairwise_distances;
use mmae::mds::{classical_mds, mds_stress, MdsResult};
use mmae::Result;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args, Debug)]
pub struct MdsArgs {
    /// Point-cloud CSV to embed.
    #[arg(long)]
    pub data: PathBuf,
    /// The CSV has no trailing label column.
    #[arg(long)]
    pub no_labels: bool,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    pub latent_dim: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Spectrum report: the centered-Gram eigenvalues (descending), the mass
/// of the negative part, which output columns were zero-filled, and the
/// stress of the final embedding.
fn spectrum_json(result: &MdsResult, stress: f64) -> String {
    let eigenvalues = result
        .eigenvalues
        .iter()
        .map(|&v| g17(v))
        .collect::<Vec<_>>()
        .join(", ");
    let zeroed = result
        .zeroed_columns
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "{{\n  \"eigenvalues\": [{eigenvalues}],\n  \"negative_mass\": {},\n  \
         \"zeroed_columns\": [{zeroed}],\n  \"stress\": {}\n}}\n",
        g17(result.negative_mass),
        g17(stress)
    )
}

pub fn run(args: MdsArgs) -> Result<()> {
    let start = Instant::now();
    let cloud = load_csv(&args.data, !args.no_labels)?;
    let distances = pairwise_distances(&cloud.points)?;
    let result = classical_mds(&distances, args.latent_dim)?;
    let stress = mds_stress(&distances, &result.embedding)?;

    fs::create_dir_all(&args.out)?;
    save_csv(
        &PointCloud::new(result.embedding.clone(), cloud.labels.clone())?,
        &args.out.join("embedding.csv"),
    )?;
    fs::write(args.out.join("spectrum.json"), spectrum_json(&result, stress))?;

    RunManifest {
        command: "mds".into(),
        seed: 0,
        git: git_describe(),
        config: serde_json::json!({
            "data": args.data.display().to_string(),
            "latent_dim": args.latent_dim,
        }),
        outputs: vec!["embedding.csv".into(), "spectrum.json".into()],
        seconds: start.elapsed().as_secs_f64(),
        epoch_seconds: vec![],
    }
    .save(&args.out.join("manifest.json"))?;

    println!(
        "embedded {} points into {}D; stress {:.6e}, negative-eigenvalue mass {:.3e}",
        cloud.n(),
        args.latent_dim,
        stress,
        result.negative_mass
    );
    Ok(())
}
