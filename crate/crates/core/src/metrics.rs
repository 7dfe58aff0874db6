//! Embedding-quality metrics comparing an input-space distance matrix
//! against a latent-space one: distance correlation, triplet accuracy,
//! kernel-density KL divergence, trustworthiness/continuity, and the H0
//! Wasserstein distance, bundled into a serializable report.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::linalg::{pairwise_distances, DistanceMatrix, Matrix, Rng};
use crate::tda::{h0_diagram, wasserstein_h0};
use crate::train::{encode, loss_recon, reconstruct, AutoencoderParams};
use serde::{Deserialize, Serialize};

/// Two distance gaps are considered tied when they differ by no more than
/// this. Used by triplet accuracy to decide when an ordering is "equal"
/// rather than strictly preserved or reversed.
pub const TRIPLET_TIE_TOLERANCE: f64 = 1e-12;

fn check_same_size(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::input(format!(
            "distance matrices disagree in size: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    Ok(a.n())
}

/// Pearson correlation between the two upper-triangular distance vectors.
///
/// Negative values are meaningful (an embedding can anti-correlate with
/// the input geometry). When either vector has zero variance the
/// correlation is undefined and NaN is returned as a sentinel; it
/// serializes as `null` in reports. Requires matching sizes and `n >= 3`.
pub fn distance_correlation(d_x: &DistanceMatrix, d_z: &DistanceMatrix) -> Result<f64> {
    let n = check_same_size(d_x, d_z)?;
    if n < 3 {
        return Err(Error::input("distance correlation needs at least 3 points"));
    }
    let x = d_x.upper_triangle();
    let z = d_z.upper_triangle();
    let m = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / m;
    let mean_z = z.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_z = 0.0;
    for (&a, &b) in x.iter().zip(&z) {
        let (da, db) = (a - mean_x, b - mean_z);
        cov += da * db;
        var_x += da * da;
        var_z += db * db;
    }
    if var_x == 0.0 || var_z == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(cov / (var_x.sqrt() * var_z.sqrt()))
}

/// Sign of a distance gap under the triplet tie tolerance.
fn gap_sign(g: f64) -> i8 {
    if g.abs() <= TRIPLET_TIE_TOLERANCE {
        0
    } else if g > 0.0 {
        1
    } else {
        -1
    }
}

/// Fraction of ordered triples `(i, j, k)` of distinct points whose
/// relative distance ordering (`d(i,j)` vs `d(i,k)`) agrees between the
/// two spaces. Ties in the first space count as preserved exactly when the
/// second space is also tied (within [`TRIPLET_TIE_TOLERANCE`]).
///
/// Passing `n_triplets = n(n-1)(n-2)` switches to exhaustive enumeration
/// of every ordered triple; any other count samples that many i.i.d.
/// triples from the stated seed.
pub fn triplet_accuracy(
    d_x: &DistanceMatrix,
    d_z: &DistanceMatrix,
    n_triplets: usize,
    seed: u64,
) -> Result<f64> {
    let n = check_same_size(d_x, d_z)?;
    if n < 3 {
        return Err(Error::input("triplet accuracy needs at least 3 points"));
    }
    if n_triplets == 0 {
        return Err(Error::input("triplet accuracy needs at least one triplet"));
    }
    let preserved = |i: usize, j: usize, k: usize| -> bool {
        let gx = d_x.get(i, j) - d_x.get(i, k);
        let gz = d_z.get(i, j) - d_z.get(i, k);
        gap_sign(gx) == gap_sign(gz)
    };

    let all_ordered = n * (n - 1) * (n - 2);
    if n_triplets == all_ordered {
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if preserved(i, j, k) {
                        hits += 1;
                    }
                }
            }
        }
        return Ok(hits as f64 / all_ordered as f64);
    }

    let mut rng = Rng::new(seed);
    let mut hits = 0usize;
    for _ in 0..n_triplets {
        let i = rng.index(n);
        let j = loop {
            let j = rng.index(n);
            if j != i {
                break j;
            }
        };
        let k = loop {
            let k = rng.index(n);
            if k != i && k != j {
                break k;
            }
        };
        if preserved(i, j, k) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_triplets as f64)
}

/// Kernel density over points: `p_i` proportional to
/// `sum_{j != i} exp(-(d_ij / d_max)^2 / sigma)`, normalized to sum 1.
/// Dividing by the matrix maximum aligns the two spaces' scales before the
/// kernel is applied. An all-zero matrix yields the uniform density.
fn point_density(d: &DistanceMatrix, sigma: f64) -> Vec<f64> {
    let n = d.n();
    let max = d.max();
    if max == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    let mut mass = vec![0.0; n];
    let mut total = 0.0;
    for (i, m) in mass.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..n {
            if j != i {
                let r = d.get(i, j) / max;
                s += (-r * r / sigma).exp();
            }
        }
        *m = s;
        total += s;
    }
    for m in &mut mass {
        *m /= total;
    }
    mass
}

/// KL divergence `KL(p || q)` between the kernel densities of the two
/// spaces at bandwidth `sigma`. Both matrices are rescaled by their own
/// maxima first, so the result is invariant to uniform scaling of either
/// space. Identical matrices give exactly 0; a tiny negative rounding
/// residue is clamped to 0 so the reported value is always non-negative.
pub fn kl_density(d_x: &DistanceMatrix, d_z: &DistanceMatrix, sigma: f64) -> Result<f64> {
    let n = check_same_size(d_x, d_z)?;
    if n < 2 {
        return Err(Error::input("KL density needs at least 2 points"));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::input(format!("KL bandwidth {sigma} must be > 0")));
    }
    let p = point_density(d_x, sigma);
    let q = point_density(d_z, sigma);
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(&q) {
        kl += pi * (pi / qi).ln();
    }
    Ok(kl.max(0.0))
}

/// All other points ordered by distance from `i`, nearest first; exact
/// distance ties broken by point index.
fn neighbor_order(d: &DistanceMatrix, i: usize) -> Vec<usize> {
    let n = d.n();
    let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    idx.sort_by(|&a, &b| d.get(i, a).total_cmp(&d.get(i, b)).then(a.cmp(&b)));
    idx
}

/// Shared rank-penalty kernel: penalizes points that appear in the k-NN of
/// `d_near` but not of `d_far`, weighted by how far down `d_far`'s ranking
/// they sit. With `(d_near, d_far) = (latent, input)` this is
/// trustworthiness; swapped, it is continuity.
fn rank_penalty_score(d_far: &DistanceMatrix, d_near: &DistanceMatrix, k: usize) -> Result<f64> {
    let n = check_same_size(d_far, d_near)?;
    if k < 1 || 2 * k >= n {
        return Err(Error::input(format!(
            "neighborhood size {k} outside [1, {}] for n = {n}",
            n.div_ceil(2).saturating_sub(1),
        )));
    }
    let mut penalty = 0.0;
    let mut far_rank = vec![0usize; n];
    let mut in_far_knn = vec![false; n];
    for i in 0..n {
        let far_order = neighbor_order(d_far, i);
        for (pos, &j) in far_order.iter().enumerate() {
            far_rank[j] = pos + 1;
            in_far_knn[j] = pos < k;
        }
        let near_order = neighbor_order(d_near, i);
        for &j in &near_order[..k] {
            if !in_far_knn[j] {
                penalty += (far_rank[j] - k) as f64;
            }
        }
    }
    let norm = n as f64 * k as f64 * (2 * n - 3 * k - 1) as f64;
    Ok(1.0 - 2.0 * penalty / norm)
}

/// Trustworthiness at neighborhood size `k`: penalizes intrusions —
/// points inside the latent k-NN that are not input-space neighbors —
/// weighted by their input-space rank. 1 means every latent neighborhood
/// is trustworthy. Requires `1 <= k < n/2`.
pub fn trustworthiness(d_x: &DistanceMatrix, d_z: &DistanceMatrix, k: usize) -> Result<f64> {
    rank_penalty_score(d_x, d_z, k)
}

/// Continuity at neighborhood size `k`: the mirror image of
/// [`trustworthiness`], penalizing input-space neighbors missing from the
/// latent k-NN, weighted by latent rank.
pub fn continuity(d_x: &DistanceMatrix, d_z: &DistanceMatrix, k: usize) -> Result<f64> {
    rank_penalty_score(d_z, d_x, k)
}

/// Scales and sizes at which [`evaluate_distances`] runs the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    /// KL bandwidths to evaluate.
    pub kl_sigmas: Vec<f64>,
    /// Neighborhood sizes for trustworthiness/continuity. Sizes invalid
    /// for the data (`2k >= n`) are skipped; at least one must remain.
    pub trust_ks: Vec<usize>,
    /// Number of sampled triplets for triplet accuracy.
    pub ta_triplets: usize,
    /// Seed for triplet sampling.
    pub ta_seed: u64,
    /// Order of the diagram Wasserstein distance.
    pub w0_order: f64,
}

impl Default for MetricConfig {
    fn default() -> MetricConfig {
        MetricConfig {
            kl_sigmas: vec![0.1],
            trust_ks: vec![5, 10, 50, 100],
            ta_triplets: 20_000,
            ta_seed: 0,
            w0_order: 1.0,
        }
    }
}

/// One full metric-suite result. `dc` may be NaN when either distance
/// vector has zero variance (serialized as `null`); every other field is
/// finite for valid inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// Mean squared reconstruction error per point.
    pub rec: f64,
    /// Pearson correlation of pairwise distances.
    pub dc: f64,
    /// Triplet accuracy.
    pub ta: f64,
    /// KL density divergence per bandwidth, ascending by bandwidth.
    pub kl: Vec<(f64, f64)>,
    /// Trustworthiness per neighborhood size, ascending by size.
    pub trust: Vec<(usize, f64)>,
    pub trust_mean: f64,
    /// Continuity per neighborhood size, ascending by size.
    pub cont: Vec<(usize, f64)>,
    pub cont_mean: f64,
    /// Wasserstein distance between the H0 diagrams.
    pub w0: f64,
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        g17(v)
    } else {
        "null".to_string()
    }
}

impl MetricReport {
    /// Whether the distance correlation was defined (non-degenerate
    /// variances in both spaces).
    pub fn dc_is_defined(&self) -> bool {
        self.dc.is_finite()
    }

    /// Serializes with a fixed key layout: `rec`, `dc`, `ta`, `kl.<sigma>`
    /// per bandwidth, `trust.k<k>` per size plus `trust.mean`, the same
    /// for `cont`, then `w0`. Values are 17-significant-digit decimals;
    /// undefined values become `null`.
    pub fn to_json(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut push = |key: String, v: f64| parts.push(format!("\"{key}\": {}", json_number(v)));
        push("rec".into(), self.rec);
        push("dc".into(), self.dc);
        push("ta".into(), self.ta);
        for &(sigma, v) in &self.kl {
            push(format!("kl.{sigma}"), v);
        }
        for &(k, v) in &self.trust {
            push(format!("trust.k{k}"), v);
        }
        push("trust.mean".into(), self.trust_mean);
        for &(k, v) in &self.cont {
            push(format!("cont.k{k}"), v);
        }
        push("cont.mean".into(), self.cont_mean);
        push("w0".into(), self.w0);
        format!("{{\n  {}\n}}\n", parts.join(",\n  "))
    }

    /// Parses a report serialized by [`MetricReport::to_json`]. `null`
    /// values come back as NaN.
    pub fn from_json(text: &str) -> Result<MetricReport> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("metric report is not valid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse("metric report must be a JSON object"))?;
        let number = |key: &str| -> Result<f64> {
            match obj.get(key) {
                None => Err(Error::parse(format!("metric report is missing \"{key}\""))),
                Some(serde_json::Value::Null) => Ok(f64::NAN),
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::parse(format!("metric \"{key}\" is not a number"))),
            }
        };
        let mut kl = Vec::new();
        let mut trust = Vec::new();
        let mut cont = Vec::new();
        for (key, v) in obj {
            let v = match v {
                serde_json::Value::Null => f64::NAN,
                other => other
                    .as_f64()
                    .ok_or_else(|| Error::parse(format!("metric \"{key}\" is not a number")))?,
            };
            if let Some(sig) = key.strip_prefix("kl.") {
                let sigma: f64 = sig
                    .parse()
                    .map_err(|_| Error::parse(format!("bad KL bandwidth key \"{key}\"")))?;
                kl.push((sigma, v));
            } else if let Some(ks) = key.strip_prefix("trust.k") {
                let k: usize = ks
                    .parse()
                    .map_err(|_| Error::parse(format!("bad trust key \"{key}\"")))?;
                trust.push((k, v));
            } else if let Some(ks) = key.strip_prefix("cont.k") {
                let k: usize = ks
                    .parse()
                    .map_err(|_| Error::parse(format!("bad continuity key \"{key}\"")))?;
                cont.push((k, v));
            }
        }
        kl.sort_by(|a, b| a.0.total_cmp(&b.0));
        trust.sort_by_key(|&(k, _)| k);
        cont.sort_by_key(|&(k, _)| k);
        Ok(MetricReport {
            rec: number("rec")?,
            dc: number("dc")?,
            ta: number("ta")?,
            kl,
            trust,
            trust_mean: number("trust.mean")?,
            cont,
            cont_mean: number("cont.mean")?,
            w0: number("w0")?,
        })
    }
}

/// Runs the full suite between a base distance matrix (input-space or
/// reference distances) and latent distances. `rec` is supplied by the
/// caller, which owns the decoder round-trip. Neighborhood sizes too
/// large for the data are skipped; it is an input error if none fit.
pub fn evaluate_distances(
    base: &DistanceMatrix,
    latent: &DistanceMatrix,
    rec: f64,
    cfg: &MetricConfig,
) -> Result<MetricReport> {
    let n = check_same_size(base, latent)?;
    let dc = distance_correlation(base, latent)?;
    let ta = triplet_accuracy(base, latent, cfg.ta_triplets, cfg.ta_seed)?;

    let mut sigmas = cfg.kl_sigmas.clone();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    let mut kl = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        kl.push((sigma, kl_density(base, latent, sigma)?));
    }

    let mut ks: Vec<usize> = cfg.trust_ks.iter().copied().filter(|&k| 2 * k < n).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::input(format!(
            "no configured neighborhood size is valid for n = {n}"
        )));
    }
    let mut trust = Vec::with_capacity(ks.len());
    let mut cont = Vec::with_capacity(ks.len());
    for &k in &ks {
        trust.push((k, trustworthiness(base, latent, k)?));
        cont.push((k, continuity(base, latent, k)?));
    }
    let trust_mean = trust.iter().map(|&(_, v)| v).sum::<f64>() / trust.len() as f64;
    let cont_mean = cont.iter().map(|&(_, v)| v).sum::<f64>() / cont.len() as f64;

    let w0 = wasserstein_h0(&h0_diagram(base), &h0_diagram(latent), cfg.w0_order)?;

    Ok(MetricReport {
        rec,
        dc,
        ta,
        kl,
        trust,
        trust_mean,
        cont,
        cont_mean,
        w0,
    })
}

/// Scores a trained autoencoder on a point cloud: eval-mode encoding for
/// the latent distances, a decoder round trip for the reconstruction
/// error, and the full suite against `base` (input-space or reference
/// distances over the same rows).
pub fn evaluate_model(
    params: &AutoencoderParams,
    points: &Matrix,
    base: &DistanceMatrix,
    cfg: &MetricConfig,
) -> Result<MetricReport> {
    if base.n() != points.rows() {
        return Err(Error::input(format!(
            "base distances cover {} points but the cloud has {}",
            base.n(),
            points.rows()
        )));
    }
    let z = encode(params, points)?;
    let latent = pairwise_distances(&z)?;
    let rec = loss_recon(points, &reconstruct(params, points)?)?;
    evaluate_distances(base, &latent, rec, cfg)
}
