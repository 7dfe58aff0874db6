//! Synthetic benchmark datasets, CSV persistence, and train/test splits.
//!
//! The generators are seeded and draw in a fixed order, so a `(config,
//! seed)` pair names one exact point cloud on every platform.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::linalg::{Matrix, Rng};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// A set of points with optional integer labels, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Matrix,
    pub labels: Option<Vec<i64>>,
}

impl PointCloud {
    pub fn new(points: Matrix, labels: Option<Vec<i64>>) -> Result<PointCloud> {
        if let Some(l) = &labels {
            if l.len() != points.rows() {
                return Err(Error::input(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.rows()
                )));
            }
        }
        Ok(PointCloud { points, labels })
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Extracts the rows at `indices`, keeping their order.
    pub fn select(&self, indices: &[usize]) -> Result<PointCloud> {
        let points = self.points.select_rows(indices)?;
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        PointCloud::new(points, labels)
    }
}

/// Configuration for the nested-spheres benchmark: `n_small` low-radius
/// spheres scattered near the origin, all enclosed by one large sphere.
///
/// By default the enclosing sphere receives `n_per_sphere * n_small`
/// points so it balances the union of the inner spheres; `n_big` overrides
/// that count for setups that want every component equally sized.
#[derive(Debug, Clone)]
pub struct NestedSpheresConfig {
    pub n_per_sphere: usize,
    pub n_small: usize,
    pub dim: usize,
    pub small_radius: f64,
    pub big_radius: f64,
    pub noise_sd: f64,
    pub n_big: Option<usize>,
}

impl Default for NestedSpheresConfig {
    fn default() -> Self {
        NestedSpheresConfig {
            n_per_sphere: 500,
            n_small: 10,
            dim: 101,
            small_radius: 5.0,
            big_radius: 25.0,
            noise_sd: 0.0,
            n_big: None,
        }
    }
}

/// Samples the nested-spheres cloud. Inner-sphere centers are i.i.d.
/// Gaussian with per-coordinate deviation `2 * small_radius / sqrt(dim)`,
/// which puts typical center norms near `2 * small_radius` and keeps the
/// inner spheres well inside the enclosing one. Labels are `0..n_small`
/// for the inner spheres and `n_small` for the enclosing sphere.
pub fn nested_spheres(cfg: &NestedSpheresConfig, seed: u64) -> Result<PointCloud> {
    if cfg.n_per_sphere == 0 || cfg.n_small == 0 || cfg.dim == 0 {
        return Err(Error::input("nested spheres: counts and dimension must be positive"));
    }
    if !(cfg.small_radius > 0.0 && cfg.big_radius > cfg.small_radius) {
        return Err(Error::input(
            "nested spheres: need 0 < small_radius < big_radius",
        ));
    }
    if cfg.noise_sd < 0.0 {
        return Err(Error::input("nested spheres: noise_sd must be nonnegative"));
    }
    let n_big = cfg.n_big.unwrap_or(cfg.n_per_sphere * cfg.n_small);
    if n_big == 0 {
        return Err(Error::input("nested spheres: enclosing sphere needs points"));
    }

    let mut rng = Rng::new(seed);
    let center_sd = 2.0 * cfg.small_radius / (cfg.dim as f64).sqrt();
    let centers: Vec<Vec<f64>> = (0..cfg.n_small)
        .map(|_| (0..cfg.dim).map(|_| center_sd * rng.standard_normal()).collect())
        .collect();

    let total = cfg.n_per_sphere * cfg.n_small + n_big;
    let mut points = Matrix::zeros(total, cfg.dim);
    let mut labels = Vec::with_capacity(total);
    let mut row = 0;
    for (s, center) in centers.iter().enumerate() {
        for _ in 0..cfg.n_per_sphere {
            let dir = unit_direction(&mut rng, cfg.dim);
            for (j, out) in points.row_mut(row).iter_mut().enumerate() {
                *out = center[j]
                    + cfg.small_radius * dir[j]
                    + cfg.noise_sd * rng.standard_normal();
            }
            labels.push(s as i64);
            row += 1;
        }
    }
    for _ in 0..n_big {
        let dir = unit_direction(&mut rng, cfg.dim);
        for (j, out) in points.row_mut(row).iter_mut().enumerate() {
            *out = cfg.big_radius * dir[j] + cfg.noise_sd * rng.standard_normal();
        }
        labels.push(cfg.n_small as i64);
        row += 1;
    }
    PointCloud::new(points, Some(labels))
}

/// Two interlocked tori (a Hopf link): torus A rings the origin in the
/// xy-plane, torus B sits at `(R, 0, 0)` in the xz-plane so each threads
/// the other's hole. The three-dimensional link is then carried into
/// `ambient_dim` by a random orthonormal linear map, which preserves all
/// pairwise distances; with `ambient_dim == 3` the map is the identity so
/// the canonical coordinates come through untouched. Labels are 0 for
/// torus A and 1 for torus B.
pub fn linked_tori(
    n_per_torus: usize,
    major_radius: f64,
    minor_radius: f64,
    ambient_dim: usize,
    seed: u64,
) -> Result<PointCloud> {
    if n_per_torus == 0 {
        return Err(Error::input("linked tori: n_per_torus must be positive"));
    }
    if ambient_dim < 3 {
        return Err(Error::input(format!(
            "linked tori: ambient_dim must be at least 3, got {ambient_dim}"
        )));
    }
    if !(minor_radius > 0.0 && major_radius > minor_radius) {
        return Err(Error::input(
            "linked tori: need 0 < minor_radius < major_radius",
        ));
    }

    let mut rng = Rng::new(seed);
    let (big_r, small_r) = (major_radius, minor_radius);
    let n = 2 * n_per_torus;
    let mut xyz = Matrix::zeros(n, 3);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let u = rng.uniform_in(0.0, std::f64::consts::TAU);
        let v = rng.uniform_in(0.0, std::f64::consts::TAU);
        let ring = big_r + small_r * v.cos();
        let row = xyz.row_mut(i);
        if i < n_per_torus {
            row[0] = ring * u.cos();
            row[1] = ring * u.sin();
            row[2] = small_r * v.sin();
            labels.push(0);
        } else {
            row[0] = big_r + ring * u.cos();
            row[1] = small_r * v.sin();
            row[2] = ring * u.sin();
            labels.push(1);
        }
    }

    let points = if ambient_dim == 3 {
        xyz
    } else {
        let q = random_orthonormal_columns(&mut rng, ambient_dim, 3);
        // (n x 3) * (3 x ambient): an isometric embedding.
        xyz.matmul(&q.transpose())?
    };
    PointCloud::new(points, Some(labels))
}

/// Configuration for concentric high-dimensional spherical shells sharing
/// one center.
#[derive(Debug, Clone)]
pub struct ConcentricSpheresConfig {
    pub n_per_shell: usize,
    pub dim: usize,
    /// Shell radii, strictly increasing.
    pub radii: Vec<f64>,
    pub noise_sd: f64,
}

impl Default for ConcentricSpheresConfig {
    fn default() -> Self {
        ConcentricSpheresConfig {
            n_per_shell: 500,
            dim: 1000,
            radii: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            noise_sd: 0.0,
        }
    }
}

/// Samples points uniformly on each shell. Labels are the shell index,
/// innermost first.
pub fn concentric_spheres(cfg: &ConcentricSpheresConfig, seed: u64) -> Result<PointCloud> {
    if cfg.n_per_shell == 0 || cfg.dim == 0 {
        return Err(Error::input("concentric spheres: counts and dimension must be positive"));
    }
    if cfg.radii.is_empty() {
        return Err(Error::input("concentric spheres: need at least one radius"));
    }
    let increasing = cfg.radii.windows(2).all(|w| w[0] < w[1]);
    if !increasing || cfg.radii[0] <= 0.0 {
        return Err(Error::input(
            "concentric spheres: radii must be positive and strictly increasing",
        ));
    }
    if cfg.noise_sd < 0.0 {
        return Err(Error::input("concentric spheres: noise_sd must be nonnegative"));
    }

    let mut rng = Rng::new(seed);
    let total = cfg.n_per_shell * cfg.radii.len();
    let mut points = Matrix::zeros(total, cfg.dim);
    let mut labels = Vec::with_capacity(total);
    let mut row = 0;
    for (s, &radius) in cfg.radii.iter().enumerate() {
        for _ in 0..cfg.n_per_shell {
            let dir = unit_direction(&mut rng, cfg.dim);
            for (j, out) in points.row_mut(row).iter_mut().enumerate() {
                *out = radius * dir[j] + cfg.noise_sd * rng.standard_normal();
            }
            labels.push(s as i64);
            row += 1;
        }
    }
    PointCloud::new(points, Some(labels))
}

/// Uniform direction on the unit sphere: a normalized Gaussian draw, with
/// a redraw guard against the (measure-zero) near-null vector.
fn unit_direction(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `rows x cols` matrix with orthonormal columns, built by Gram-Schmidt on
/// Gaussian draws. Redraws any column that falls (numerically) inside the
/// span of its predecessors.
fn random_orthonormal_columns(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.standard_normal()).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for x in &mut v {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    let mut q = Matrix::zeros(rows, cols);
    for (j, b) in basis.iter().enumerate() {
        for (i, &x) in b.iter().enumerate() {
            q.set(i, j, x);
        }
    }
    q
}

/// Writes a cloud as CSV: header `x0,...,x{d-1}[,label]`, one point per
/// row, floats at 17 significant digits (exact round-trip), LF line
/// endings.
pub fn save_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    let d = cloud.dim();
    let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    if cloud.labels.is_some() {
        header.push("label".to_string());
    }
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for i in 0..cloud.n() {
        let mut fields: Vec<String> = cloud.points.row(i).iter().map(|&x| g17(x)).collect();
        if let Some(labels) = &cloud.labels {
            fields.push(labels[i].to_string());
        }
        w.write_all(fields.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a cloud from CSV. The header fixes the column count; when
/// `has_labels` is set the last column is parsed as an integer label.
/// Ragged rows, non-numeric cells and empty files are parse errors that
/// name the offending line (1-based, header included). Row order is
/// preserved.
pub fn load_csv(path: &Path, has_labels: bool) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(format!("{}: empty file", path.display())))?;
    let n_cols = header.split(',').count();
    let d = if has_labels {
        if n_cols < 2 {
            return Err(Error::parse(format!(
                "{}: need at least one feature column plus a label column",
                path.display()
            )));
        }
        n_cols - 1
    } else {
        if n_cols < 1 {
            return Err(Error::parse(format!("{}: empty header", path.display())));
        }
        n_cols
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1; // humans count from 1
        if line.is_empty() {
            continue; // tolerate a trailing blank line
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_cols {
            return Err(Error::parse(format!(
                "{} line {line_no}: {} cells, expected {n_cols}",
                path.display(),
                cells.len()
            )));
        }
        let mut row = Vec::with_capacity(d);
        for (c, cell) in cells[..d].iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                Error::parse(format!(
                    "{} line {line_no}: column {c} is not a number: {cell:?}",
                    path.display()
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::parse(format!(
                    "{} line {line_no}: column {c} is not finite",
                    path.display()
                )));
            }
            row.push(value);
        }
        if has_labels {
            let cell = cells[d].trim();
            let label: i64 = cell.parse().map_err(|_| {
                Error::parse(format!(
                    "{} line {line_no}: label is not an integer: {cell:?}",
                    path.display()
                ))
            })?;
            labels.push(label);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(format!("{}: no data rows", path.display())));
    }
    let points = Matrix::from_rows(&rows)?;
    PointCloud::new(points, has_labels.then_some(labels))
}

/// Seeded train/test split. With labels present the split is stratified:
/// each class is shuffled and divided separately, keeping per-class test
/// ratios within one point of `test_fraction`. Both halves preserve the
/// original row order, and together they partition the input exactly.
pub fn split(cloud: &PointCloud, test_fraction: f64, seed: u64) -> Result<(PointCloud, PointCloud)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::input(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let n = cloud.n();
    let mut rng = Rng::new(seed);
    let mut is_test = vec![false; n];

    let groups: Vec<Vec<usize>> = match &cloud.labels {
        Some(labels) => {
            let mut by_label: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for (i, &l) in labels.iter().enumerate() {
                by_label.entry(l).or_default().push(i);
            }
            by_label.into_values().collect()
        }
        None => vec![(0..n).collect()],
    };
    for mut group in groups {
        rng.shuffle(&mut group);
        let n_test = (group.len() as f64 * test_fraction).round() as usize;
        for &i in group.iter().take(n_test) {
            is_test[i] = true;
        }
    }

    let train_idx: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let test_idx: Vec<usize> = (0..n).filter(|&i| is_test[i]).collect();
    Ok((cloud.select(&train_idx)?, cloud.select(&test_idx)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spheres_config() -> NestedSpheresConfig {
        NestedSpheresConfig {
            n_per_sphere: 20,
            n_small: 10,
            dim: 101,
            small_radius: 5.0,
            big_radius: 25.0,
            noise_sd: 0.0,
            n_big: None,
        }
    }

    #[test]
    fn nested_spheres_has_eleven_components_with_expected_sizes() {
        let cloud = nested_spheres(&small_spheres_config(), 1).unwrap();
        assert_eq!(cloud.n(), 20 * 10 * 2);
        let labels = cloud.labels.as_ref().unwrap();
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for &l in labels {
            *counts.entry(l).or_default() += 1;
        }
        assert_eq!(counts.len(), 11);
        for l in 0..10 {
            assert_eq!(counts[&l], 20);
        }
        assert_eq!(counts[&10], 200);
    }

    #[test]
    fn nested_spheres_big_component_override() {
        let cfg = NestedSpheresConfig { n_big: Some(20), ..small_spheres_config() };
        let cloud = nested_spheres(&cfg, 1).unwrap();
        assert_eq!(cloud.n(), 20 * 11);
    }

    #[test]
    fn noise_free_big_sphere_sits_exactly_on_its_radius() {
        let cloud = nested_spheres(&small_spheres_config(), 3).unwrap();
        let labels = cloud.labels.as_ref().unwrap();
        for i in 0..cloud.n() {
            if labels[i] == 10 {
                let norm = cloud.points.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 25.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn noisy_big_sphere_mean_norm_is_statistically_consistent() {
        let cfg = NestedSpheresConfig { noise_sd: 0.5, ..small_spheres_config() };
        let cloud = nested_spheres(&cfg, 4).unwrap();
        let labels = cloud.labels.as_ref().unwrap();
        let norms: Vec<f64> = (0..cloud.n())
            .filter(|&i| labels[i] == 10)
            .map(|i| cloud.points.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let n = norms.len() as f64;
        let mean = norms.iter().sum::<f64>() / n;
        let sd = (norms.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        // The per-point norm is biased slightly above the radius by the
        // added isotropic noise; three standard errors plus that bias
        // bound keeps the check honest without being flaky.
        let noise_bias = 0.5 * 0.5 * (101.0) / (2.0 * 25.0);
        assert!(
            (mean - 25.0 - noise_bias).abs() < 3.0 * sd / n.sqrt() + 0.1,
            "mean {mean} sd {sd}"
        );
    }

    #[test]
    fn generators_are_bitwise_deterministic_per_seed() {
        let a = nested_spheres(&small_spheres_config(), 9).unwrap();
        let b = nested_spheres(&small_spheres_config(), 9).unwrap();
        assert_eq!(a, b);
        let c = nested_spheres(&small_spheres_config(), 10).unwrap();
        assert_ne!(a.points.data(), c.points.data());

        let t1 = linked_tori(50, 5.0, 1.0, 7, 2).unwrap();
        let t2 = linked_tori(50, 5.0, 1.0, 7, 2).unwrap();
        assert_eq!(t1, t2);

        let s1 = concentric_spheres(&small_concentric_config(), 5).unwrap();
        let s2 = concentric_spheres(&small_concentric_config(), 5).unwrap();
        assert_eq!(s1, s2);
    }

    fn small_concentric_config() -> ConcentricSpheresConfig {
        ConcentricSpheresConfig {
            n_per_shell: 30,
            dim: 50,
            radii: vec![5.0, 10.0, 15.0],
            noise_sd: 0.0,
        }
    }

    #[test]
    fn tori_in_three_dimensions_satisfy_their_implicit_equations() {
        let cloud = linked_tori(200, 5.0, 1.0, 3, 7).unwrap();
        let labels = cloud.labels.as_ref().unwrap();
        for i in 0..cloud.n() {
            let p = cloud.points.row(i);
            let (x, y, z) = (p[0], p[1], p[2]);
            let residual = if labels[i] == 0 {
                // xy-plane torus at the origin
                let ring = (x * x + y * y).sqrt() - 5.0;
                ring * ring + z * z - 1.0
            } else {
                // xz-plane torus centered at (5, 0, 0)
                let ring = ((x - 5.0) * (x - 5.0) + z * z).sqrt() - 5.0;
                ring * ring + y * y - 1.0
            };
            assert!(residual.abs() < 1e-9, "point {i}: residual {residual}");
        }
    }

    #[test]
    fn torus_embedding_is_an_isometry() {
        let low = linked_tori(60, 5.0, 1.0, 3, 11).unwrap();
        let high = linked_tori(60, 5.0, 1.0, 100, 11).unwrap();
        assert_eq!(high.dim(), 100);
        let d_low = crate::linalg::pairwise_distances(&low.points).unwrap();
        let d_high = crate::linalg::pairwise_distances(&high.points).unwrap();
        for i in 0..low.n() {
            for j in 0..low.n() {
                assert!((d_low.get(i, j) - d_high.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tori_reject_sub_three_dimensional_ambient_spaces() {
        assert!(matches!(linked_tori(10, 5.0, 1.0, 2, 1), Err(Error::Input(_))));
    }

    #[test]
    fn single_shell_sits_on_its_radius() {
        let cfg = ConcentricSpheresConfig {
            n_per_shell: 40,
            dim: 30,
            radii: vec![7.0],
            noise_sd: 0.0,
        };
        let cloud = concentric_spheres(&cfg, 2).unwrap();
        for i in 0..cloud.n() {
            let norm = cloud.points.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn default_concentric_config_has_five_shells() {
        let cfg = ConcentricSpheresConfig {
            n_per_shell: 5,
            ..ConcentricSpheresConfig::default()
        };
        let cloud = concentric_spheres(&cfg, 3).unwrap();
        let labels = cloud.labels.as_ref().unwrap();
        let distinct: std::collections::BTreeSet<i64> = labels.iter().copied().collect();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn shells_keep_their_radial_separation() {
        let cfg = ConcentricSpheresConfig {
            n_per_shell: 50,
            dim: 40,
            radii: vec![5.0, 10.0],
            noise_sd: 0.1,
        };
        let cloud = concentric_spheres(&cfg, 6).unwrap();
        let labels = cloud.labels.as_ref().unwrap();
        let d = crate::linalg::pairwise_distances(&cloud.points).unwrap();
        let mut min_between = f64::INFINITY;
        for i in 0..cloud.n() {
            for j in (i + 1)..cloud.n() {
                if labels[i] != labels[j] {
                    min_between = min_between.min(d.get(i, j));
                }
            }
        }
        assert!(min_between >= 5.0 - 6.0 * 0.1, "min inter-shell distance {min_between}");
    }

    #[test]
    fn rejects_non_increasing_radii() {
        let cfg = ConcentricSpheresConfig {
            n_per_shell: 5,
            dim: 10,
            radii: vec![5.0, 5.0],
            noise_sd: 0.0,
        };
        assert!(concentric_spheres(&cfg, 1).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        let cloud = linked_tori(25, 5.0, 1.0, 6, 13).unwrap();
        save_csv(&cloud, &path).unwrap();
        let back = load_csv(&path, true).unwrap();
        assert_eq!(cloud, back);

        // And without labels.
        let bare = PointCloud::new(cloud.points.clone(), None).unwrap();
        let path2 = dir.path().join("bare.csv");
        save_csv(&bare, &path2).unwrap();
        let back2 = load_csv(&path2, false).unwrap();
        assert_eq!(bare, back2);
    }

    #[test]
    fn csv_writer_emits_the_documented_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.csv");
        let cloud = PointCloud::new(
            Matrix::from_rows(&[vec![0.5, -1.0]]).unwrap(),
            Some(vec![3]),
        )
        .unwrap();
        save_csv(&cloud, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "x0,x1,label\n5.0000000000000000e-1,-1.0000000000000000e0,3\n"
        );
    }

    #[test]
    fn csv_parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();

        let ragged = dir.path().join("ragged.csv");
        std::fs::write(&ragged, "x0,x1\n1.0,2.0\n3.0\n").unwrap();
        let err = load_csv(&ragged, false).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let garbage = dir.path().join("garbage.csv");
        std::fs::write(&garbage, "x0,x1\n1.0,banana\n").unwrap();
        let err = load_csv(&garbage, false).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(matches!(err, Error::Parse(_)));

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(load_csv(&empty, false), Err(Error::Parse(_))));

        let header_only = dir.path().join("header.csv");
        std::fs::write(&header_only, "x0,x1\n").unwrap();
        assert!(matches!(load_csv(&header_only, false), Err(Error::Parse(_))));

        let bad_label = dir.path().join("bad_label.csv");
        std::fs::write(&bad_label, "x0,label\n1.0,2.5\n").unwrap();
        let err = load_csv(&bad_label, true).unwrap_err();
        assert!(err.to_string().contains("label"), "{err}");
    }

    #[test]
    fn split_halves_ten_points_evenly() {
        let cloud = PointCloud::new(
            Matrix::from_rows(&(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap(),
            None,
        )
        .unwrap();
        let (train, test) = split(&cloud, 0.5, 1).unwrap();
        assert_eq!(train.n(), 5);
        assert_eq!(test.n(), 5);
    }

    #[test]
    fn split_is_stratified_disjoint_and_exhaustive() {
        let cloud = nested_spheres(&small_spheres_config(), 21).unwrap();
        let (train, test) = split(&cloud, 0.25, 7).unwrap();
        assert_eq!(train.n() + test.n(), cloud.n());

        // Per-class ratio within one point of the requested fraction.
        let count = |c: &PointCloud, l: i64| {
            c.labels.as_ref().unwrap().iter().filter(|&&x| x == l).count()
        };
        for l in 0..=10 {
            let total = count(&cloud, l);
            let in_test = count(&test, l);
            let want = total as f64 * 0.25;
            assert!(
                (in_test as f64 - want).abs() <= 1.0,
                "label {l}: {in_test} of {total} in test"
            );
        }

        // Disjoint and exhaustive: every original row appears exactly once.
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for part in [&train, &test] {
            for i in 0..part.n() {
                seen.push(part.points.row(i).to_vec());
            }
        }
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut original: Vec<Vec<f64>> =
            (0..cloud.n()).map(|i| cloud.points.row(i).to_vec()).collect();
        original.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(seen, original);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let cloud = nested_spheres(&small_spheres_config(), 2).unwrap();
        let (tr1, te1) = split(&cloud, 0.2, 5).unwrap();
        let (tr2, te2) = split(&cloud, 0.2, 5).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        let (_, te3) = split(&cloud, 0.2, 6).unwrap();
        assert_ne!(te1.points.data(), te3.points.data());
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let cloud = PointCloud::new(Matrix::zeros(4, 2), None).unwrap();
        assert!(split(&cloud, 0.0, 1).is_err());
        assert!(split(&cloud, 1.0, 1).is_err());
    }
}
