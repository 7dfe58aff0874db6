//! `sweep`: seeded random search over training hyperparameters, scored by
//! held-out kernel-density divergence at bandwidth 0.1 (minimized).
//!
//! Every trial configuration is drawn up front from one seeded stream and
//! the trials are fully independent, so the artifacts are byte-identical
//! no matter how many worker threads run them.

use crate::config::{build_reference, SweepSpec};
use crate::manifest::{git_describe, RunManifest};
use clap::Args;
use mmae::datasets::{load_csv, split, PointCloud};
use mmae::fmt::g17;
use mmae::linalg::{pairwise_distances, Rng};
use mmae::metrics::kl_density;
use mmae::train::{encode, fit, history_to_csv, ReferenceSpec, TrainConfig};
use mmae::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Bandwidth of the fixed sweep objective.
const OBJECTIVE_SIGMA: f64 = 0.1;

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON sweep specification.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; results are identical for any count.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

struct TrialOutcome {
    history_csv: String,
    objective: f64,
}

/// Uniform integer draw from the inclusive range.
fn draw_int(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    let span = (hi - lo + 1) as f64;
    lo + ((rng.uniform() * span) as usize).min(hi - lo)
}

/// Log-uniform draw from `[lo, hi]`.
fn draw_log(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    rng.uniform_in(lo.ln(), hi.ln()).exp()
}

/// Draws every trial configuration up front from one seeded stream, so
/// the search space never depends on how many workers later run it. The
/// per-trial draw order is fixed: batch size, learning rate, then any
/// regularizer weight, then any PCA width.
fn draw_trials(spec: &SweepSpec, input_dim: usize, max_rank: usize) -> Result<Vec<TrainConfig>> {
    let pca_range = match (&spec.base.reference, spec.pca_k_range) {
        (ReferenceSpec::Pca { .. }, Some(r)) => Some(r),
        (ReferenceSpec::Pca { .. }, None) => {
            let hi = input_dim.min(max_rank).max(1);
            let lo = ((0.8 * hi as f64).ceil() as usize).clamp(1, hi);
            Some([lo, hi])
        }
        _ => None,
    };
    let mut rng = Rng::new(spec.seed);
    (0..spec.trials)
        .map(|t| {
            let mut cfg = spec.base.clone();
            cfg.seed = spec.base.seed.wrapping_add(t as u64);
            cfg.batch_size = draw_int(&mut rng, spec.batch_range[0], spec.batch_range[1]);
            cfg.lr = draw_log(&mut rng, spec.lr_range[0], spec.lr_range[1]);
            if let Some([lo, hi]) = spec.lambda_range {
                cfg.lambda = draw_log(&mut rng, lo, hi);
                cfg.lambda_final = None;
            }
            if let Some([lo, hi]) = pca_range {
                cfg.reference = ReferenceSpec::Pca {
                    components: draw_int(&mut rng, lo, hi),
                };
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// Trains one configuration and scores it: kernel-density divergence at
/// the fixed bandwidth between validation distances in input space and in
/// the latent space.
fn run_trial(
    config: &TrainConfig,
    fit_cloud: &PointCloud,
    val_cloud: &PointCloud,
) -> Result<TrialOutcome> {
    let reference = build_reference(&config.reference, fit_cloud)?;
    let result = fit(config, fit_cloud, &reference)?;
    let z = encode(&result.params, &val_cloud.points)?;
    let objective = kl_density(
        &pairwise_distances(&val_cloud.points)?,
        &pairwise_distances(&z)?,
        OBJECTIVE_SIGMA,
    )?;
    Ok(TrialOutcome {
        history_csv: history_to_csv(&result.history),
        objective,
    })
}

/// Lowest objective wins; ties resolve to the earliest trial and trials
/// without a finite objective never win.
fn best_index(objectives: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (t, &v) in objectives.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            None => best = Some((t, v)),
            Some((_, b)) if v < b => best = Some((t, v)),
            _ => {}
        }
    }
    best.map(|(t, _)| t)
        .ok_or_else(|| Error::numerical("no trial produced a finite objective"))
}

pub fn run(args: SweepArgs) -> Result<()> {
    let start = Instant::now();
    let spec = SweepSpec::load(&args.config)?;
    let cloud = load_csv(Path::new(&spec.data), spec.has_labels)?;
    let (fit_cloud, val_cloud) = split(&cloud, spec.validation_fraction, spec.seed)?;
    let trials = draw_trials(&spec, cloud.dim(), fit_cloud.n().saturating_sub(1))?;

    let workers = args.threads.clamp(1, trials.len());
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, Result<TrialOutcome>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::SeqCst);
                if t >= trials.len() {
                    break;
                }
                let outcome = run_trial(&trials[t], &fit_cloud, &val_cloud);
                done.lock().unwrap().push((t, outcome));
            });
        }
    });
    let mut slots = done.into_inner().unwrap();
    slots.sort_by_key(|(t, _)| *t);
    // Fail on the earliest broken trial so the reported error does not
    // depend on scheduling.
    let mut results: Vec<TrialOutcome> = Vec::with_capacity(slots.len());
    for (_, outcome) in slots {
        results.push(outcome?);
    }

    fs::create_dir_all(&args.out)?;
    let mut outputs: Vec<String> = Vec::new();
    for (t, outcome) in results.iter().enumerate() {
        let dir = args.out.join(format!("trials/t{t:02}"));
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("history.csv"), &outcome.history_csv)?;
        outputs.push(format!("trials/t{t:02}/history.csv"));
    }

    let mut table = String::from("trial,batch_size,lr,lambda,pca_k,kl_0.1\n");
    for (t, (cfg, outcome)) in trials.iter().zip(&results).enumerate() {
        let pca_k = match &cfg.reference {
            ReferenceSpec::Pca { components } => components.to_string(),
            _ => String::new(),
        };
        table.push_str(&format!(
            "{t},{},{},{},{pca_k},{}\n",
            cfg.batch_size,
            g17(cfg.lr),
            g17(cfg.lambda),
            g17(outcome.objective)
        ));
    }
    fs::write(args.out.join("trials.csv"), &table)?;
    outputs.push("trials.csv".into());

    let objectives: Vec<f64> = results.iter().map(|r| r.objective).collect();
    let best = best_index(&objectives)?;
    let best_json = serde_json::to_string_pretty(&trials[best])
        .map_err(|e| Error::parse(format!("serializing best config: {e}")))?;
    fs::write(args.out.join("best_config.json"), best_json + "\n")?;
    outputs.push("best_config.json".into());

    RunManifest {
        command: "sweep".into(),
        seed: spec.seed,
        git: git_describe(),
        config: serde_json::to_value(&spec)
            .map_err(|e| Error::parse(format!("echoing sweep spec: {e}")))?,
        outputs,
        seconds: start.elapsed().as_secs_f64(),
        epoch_seconds: vec![],
    }
    .save(&args.out.join("manifest.json"))?;

    println!(
        "best of {} trials: trial {best} with kl({OBJECTIVE_SIGMA}) = {:.6e} -> {}",
        trials.len(),
        objectives[best],
        args.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_draws_cover_the_inclusive_range() {
        let mut rng = Rng::new(11);
        let mut seen = [false; 4];
        for _ in 0..200 {
            let v = draw_int(&mut rng, 3, 6);
            assert!((3..=6).contains(&v));
            seen[v - 3] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn log_draws_stay_in_range_and_spread_across_decades() {
        let mut rng = Rng::new(12);
        let mut low_decade = 0;
        for _ in 0..400 {
            let v = draw_log(&mut rng, 1e-4, 1e-2);
            assert!((1e-4..=1e-2).contains(&v));
            if v < 1e-3 {
                low_decade += 1;
            }
        }
        // Log-uniform puts about half the draws below the geometric mean.
        assert!((100..=300).contains(&low_decade));
    }

    #[test]
    fn the_earliest_minimum_wins_and_nans_never_do() {
        assert_eq!(best_index(&[2.0, 1.0, 1.0]).unwrap(), 1);
        assert_eq!(best_index(&[1.0, 1.0]).unwrap(), 0);
        assert_eq!(best_index(&[f64::NAN, 5.0]).unwrap(), 1);
        assert!(best_index(&[f64::NAN, f64::INFINITY]).is_err());
    }
}
