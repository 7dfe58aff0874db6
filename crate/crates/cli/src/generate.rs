//! `generate`: synthetic benchmark clouds written as labeled CSV.

use crate::manifest::{git_describe, RunManifest};
use clap::Subcommand;
use mmae::datasets::{
    concentric_spheres, linked_tori, nested_spheres, save_csv, ConcentricSpheresConfig,
    NestedSpheresConfig,
};
use mmae::Result;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Subcommand, Debug)]
pub enum Dataset {
    /// Small spheres scattered inside one enclosing sphere.
    Spheres {
        /// Points on each inner sphere.
        #[arg(long, default_value_t = 500)]
        n_per_sphere: usize,
        /// Number of inner spheres.
        #[arg(long, default_value_t = 10)]
        n_small: usize,
        #[arg(long, default_value_t = 101)]
        dim: usize,
        #[arg(long, default_value_t = 5.0)]
        small_radius: f64,
        #[arg(long, default_value_t = 25.0)]
        big_radius: f64,
        /// Gaussian surface noise deviation.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Points on the enclosing sphere; defaults to n_per_sphere *
        /// n_small so the outside balances the union of the insides.
        #[arg(long)]
        n_big: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Two interlocked tori carried isometrically into a high-dimensional
    /// ambient space.
    LinkedTori {
        #[arg(long, default_value_t = 500)]
        n_per_torus: usize,
        #[arg(long, default_value_t = 5.0)]
        major_radius: f64,
        #[arg(long, default_value_t = 1.0)]
        minor_radius: f64,
        /// Ambient dimension of the embedding; at least 3.
        #[arg(long = "ambient-d", default_value_t = 100)]
        ambient_d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Concentric spherical shells sharing one center.
    ConcentricSpheres {
        #[arg(long, default_value_t = 500)]
        n_per_shell: usize,
        #[arg(long, default_value_t = 1000)]
        dim: usize,
        /// Shell radii, strictly increasing.
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 15.0, 20.0, 25.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(dataset: Dataset) -> Result<()> {
    let start = Instant::now();
    let (cloud, seed, echo, out) = match dataset {
        Dataset::Spheres {
            n_per_sphere,
            n_small,
            dim,
            small_radius,
            big_radius,
            noise_sd,
            n_big,
            seed,
            out,
        } => {
            let cfg = NestedSpheresConfig {
                n_per_sphere,
                n_small,
                dim,
                small_radius,
                big_radius,
                noise_sd,
                n_big,
            };
            let echo = serde_json::json!({
                "dataset": "spheres",
                "n_per_sphere": n_per_sphere,
                "n_small": n_small,
                "dim": dim,
                "small_radius": small_radius,
                "big_radius": big_radius,
                "noise_sd": noise_sd,
                "n_big": n_big,
            });
            (nested_spheres(&cfg, seed)?, seed, echo, out)
        }
        Dataset::LinkedTori {
            n_per_torus,
            major_radius,
            minor_radius,
            ambient_d,
            seed,
            out,
        } => {
            let echo = serde_json::json!({
                "dataset": "linked-tori",
                "n_per_torus": n_per_torus,
                "major_radius": major_radius,
                "minor_radius": minor_radius,
                "ambient_d": ambient_d,
            });
            (
                linked_tori(n_per_torus, major_radius, minor_radius, ambient_d, seed)?,
                seed,
                echo,
                out,
            )
        }
        Dataset::ConcentricSpheres {
            n_per_shell,
            dim,
            radii,
            noise_sd,
            seed,
            out,
        } => {
            let cfg = ConcentricSpheresConfig {
                n_per_shell,
                dim,
                radii: radii.clone(),
                noise_sd,
            };
            let echo = serde_json::json!({
                "dataset": "concentric-spheres",
                "n_per_shell": n_per_shell,
                "dim": dim,
                "radii": radii,
                "noise_sd": noise_sd,
            });
            (concentric_spheres(&cfg, seed)?, seed, echo, out)
        }
    };

    fs::create_dir_all(&out)?;
    save_csv(&cloud, &out.join("data.csv"))?;
    RunManifest {
        command: "generate".into(),
        seed,
        git: git_describe(),
        config: echo,
        outputs: vec!["data.csv".into()],
        seconds: start.elapsed().as_secs_f64(),
        epoch_seconds: vec![],
    }
    .save(&out.join("manifest.json"))?;
    println!(
        "wrote {} points ({} features) to {}",
        cloud.n(),
        cloud.dim(),
        out.display()
    );
    Ok(())
}
