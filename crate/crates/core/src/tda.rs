//! H0 persistent homology of finite metric spaces.
//!
//! Connected-component persistence of a Vietoris–Rips filtration is fully
//! determined by the minimum spanning tree: the deaths are exactly the MST
//! edge weights. This module computes that tree, the resulting diagrams,
//! and exact Wasserstein / bottleneck distances between diagrams via
//! assignment solvers. Everything here is deterministic; ties in the MST
//! are broken lexicographically by `(weight, i, j)`.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::linalg::DistanceMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::Write as IoWrite;
use std::path::Path;

/// One spanning-tree edge; endpoints are stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// A minimum spanning tree of the complete distance graph, listed in
/// ascending `(weight, i, j)` order. Exactly `n - 1` edges for `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct MstEdges {
    edges: Vec<MstEdge>,
}

impl MstEdges {
    pub fn edges(&self) -> &[MstEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// Prim's algorithm on the complete graph described by `d`.
///
/// At every step the cut edge with the smallest `(weight, i, j)` triple is
/// added, so equal-weight inputs always yield the same tree. Input validity
/// (symmetry, zero diagonal, non-negativity) is guaranteed by the
/// [`DistanceMatrix`] type, which rejects malformed matrices at
/// construction.
pub fn minimum_spanning_tree(d: &DistanceMatrix) -> MstEdges {
    let n = d.n();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n <= 1 {
        return MstEdges { edges };
    }

    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    in_tree[0] = true;
    for v in 1..n {
        key[v] = d.get(0, v);
    }

    for _ in 1..n {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let better = match best {
                None => true,
                Some(u) => {
                    (key[v], parent[v].min(v), parent[v].max(v))
                        < (key[u], parent[u].min(u), parent[u].max(u))
                }
            };
            if better {
                best = Some(v);
            }
        }
        let v = best.expect("complete graph always has a frontier vertex");
        in_tree[v] = true;
        edges.push(MstEdge {
            i: parent[v].min(v),
            j: parent[v].max(v),
            weight: key[v],
        });
        for w in 0..n {
            if in_tree[w] {
                continue;
            }
            let cand = d.get(v, w);
            if cand < key[w]
                || (cand == key[w] && (v.min(w), v.max(w)) < (parent[w].min(w), parent[w].max(w)))
            {
                key[w] = cand;
                parent[w] = v;
            }
        }
    }

    edges.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    MstEdges { edges }
}

/// An H0 diagram: every feature is born at radius 0, so only the deaths are
/// kept, sorted non-decreasing. The one infinite bar is omitted, leaving
/// `n - 1` finite deaths for an `n`-point space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagramH0 {
    deaths: Vec<f64>,
}

impl PersistenceDiagramH0 {
    /// Builds a diagram from death radii, which must be finite and
    /// non-negative; they are sorted internally.
    pub fn new(mut deaths: Vec<f64>) -> Result<PersistenceDiagramH0> {
        for &d in &deaths {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::input(format!(
                    "diagram death {d} is not a finite non-negative radius"
                )));
            }
        }
        deaths.sort_by(f64::total_cmp);
        Ok(PersistenceDiagramH0 { deaths })
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn len(&self) -> usize {
        self.deaths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deaths.is_empty()
    }

    /// Writes the diagram as `birth,death` CSV rows (births are all 0).
    pub fn write_csv<W: IoWrite>(&self, mut w: W) -> Result<()> {
        writeln!(w, "birth,death")?;
        for &d in &self.deaths {
            writeln!(w, "{},{}", g17(0.0), g17(d))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }
}

/// H0 persistence of the Vietoris–Rips filtration over `d`: the sorted MST
/// edge weights. A single point has an empty diagram.
pub fn h0_diagram(d: &DistanceMatrix) -> PersistenceDiagramH0 {
    let mst = minimum_spanning_tree(d);
    let deaths: Vec<f64> = mst.edges.iter().map(|e| e.weight).collect();
    PersistenceDiagramH0 { deaths }
}

/// The cost of matching two off-diagonal points, before raising to `q`.
fn pair_gap(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

/// The cost of retiring a point to the diagonal: half its persistence.
fn diagonal_gap(a: f64) -> f64 {
    a / 2.0
}

fn pow_q(c: f64, q: f64) -> f64 {
    if q == 1.0 {
        c
    } else {
        c.powf(q)
    }
}

/// Orders a pair of diagrams canonically (shorter first; ties broken by
/// lexicographic death comparison) so the distance solvers see the same
/// arguments either way round and symmetry holds bit-for-bit.
fn canonical_order<'a>(
    a: &'a PersistenceDiagramH0,
    b: &'a PersistenceDiagramH0,
) -> (&'a PersistenceDiagramH0, &'a PersistenceDiagramH0) {
    let swap = match a.len().cmp(&b.len()) {
        Ordering::Less => false,
        Ordering::Greater => true,
        Ordering::Equal => {
            let mut s = false;
            for (x, y) in a.deaths.iter().zip(&b.deaths) {
                match x.total_cmp(y) {
                    Ordering::Less => break,
                    Ordering::Greater => {
                        s = true;
                        break;
                    }
                    Ordering::Equal => {}
                }
            }
            s
        }
    };
    if swap {
        (b, a)
    } else {
        (a, b)
    }
}

/// Minimum-cost perfect assignment on an `m x m` matrix (row-major) via the
/// potentials form of the Hungarian algorithm. Returns the summed cost of
/// the optimal assignment, re-read from the original matrix entries.
fn hungarian_min_cost(cost: &[f64], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for j in 1..=m {
        total += cost[(p[j] - 1) * m + (j - 1)];
    }
    total
}

/// Order-`q` Wasserstein distance between H0 diagrams.
///
/// Every point may match a point of the other diagram (cost
/// `|death_a - death_b|`) or its own diagonal projection (cost `death/2`);
/// leftover diagonal slots pair with each other for free. The optimum is
/// found exactly on the standard `(|A|+|B|)`-square augmented cost matrix,
/// and the result is the q-th root of the summed q-th-power costs.
/// Requires `q >= 1`.
pub fn wasserstein_h0(a: &PersistenceDiagramH0, b: &PersistenceDiagramH0, q: f64) -> Result<f64> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::input(format!("Wasserstein order {q} must be >= 1")));
    }
    let (a, b) = canonical_order(a, b);
    let (la, lb) = (a.len(), b.len());
    let m = la + lb;
    if m == 0 {
        return Ok(0.0);
    }
    let mut cost = vec![0.0; m * m];
    for (i, &da) in a.deaths.iter().enumerate() {
        for (j, &db) in b.deaths.iter().enumerate() {
            cost[i * m + j] = pow_q(pair_gap(da, db), q);
        }
        let c = pow_q(diagonal_gap(da), q);
        for j in lb..m {
            cost[i * m + j] = c;
        }
    }
    for (j, &db) in b.deaths.iter().enumerate() {
        let c = pow_q(diagonal_gap(db), q);
        for i in la..m {
            cost[i * m + j] = c;
        }
    }
    let total = hungarian_min_cost(&cost, m);
    Ok(if q == 1.0 { total } else { total.powf(1.0 / q) })
}

/// Bottleneck distance between H0 diagrams: the smallest cap `c` such that
/// a perfect matching exists using only pairs of cost at most `c` (same
/// cost model as [`wasserstein_h0`]). Solved by binary search over the
/// finite set of achievable costs with an augmenting-path feasibility
/// check at each candidate.
pub fn bottleneck_h0(a: &PersistenceDiagramH0, b: &PersistenceDiagramH0) -> f64 {
    let (a, b) = canonical_order(a, b);
    let mut cands = vec![0.0];
    for &x in &a.deaths {
        cands.push(diagonal_gap(x));
    }
    for &y in &b.deaths {
        cands.push(diagonal_gap(y));
    }
    for &x in &a.deaths {
        for &y in &b.deaths {
            cands.push(pair_gap(x, y));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();

    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matching_feasible(&a.deaths, &b.deaths, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

/// Kuhn's augmenting-path test: does a perfect matching exist when only
/// pairs of cost <= `cap` are allowed? Left vertices are A-points followed
/// by B's diagonal slots; right vertices are B-points followed by A's
/// diagonal slots; diagonal-to-diagonal pairs are always allowed.
fn matching_feasible(a: &[f64], b: &[f64], cap: f64) -> bool {
    let (la, lb) = (a.len(), b.len());
    let m = la + lb;
    let allowed = |l: usize, r: usize| -> bool {
        match (l < la, r < lb) {
            (true, true) => pair_gap(a[l], b[r]) <= cap,
            (true, false) => diagonal_gap(a[l]) <= cap,
            (false, true) => diagonal_gap(b[r]) <= cap,
            (false, false) => true,
        }
    };

    fn try_augment(
        l: usize,
        m: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        match_r: &mut [usize],
        seen: &mut [bool],
    ) -> bool {
        for r in 0..m {
            if seen[r] || !allowed(l, r) {
                continue;
            }
            seen[r] = true;
            if match_r[r] == usize::MAX || try_augment(match_r[r], m, allowed, match_r, seen) {
                match_r[r] = l;
                return true;
            }
        }
        false
    }

    let mut match_r = vec![usize::MAX; m];
    for l in 0..m {
        let mut seen = vec![false; m];
        if !try_augment(l, m, &allowed, &mut match_r, &mut seen) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{concentric_spheres, ConcentricSpheresConfig};
    use crate::linalg::{pairwise_distances, Matrix, Rng};

    fn random_distance_matrix(n: usize, dim: usize, seed: u64) -> DistanceMatrix {
        let mut rng = Rng::new(seed);
        let data: Vec<f64> = (0..n * dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        pairwise_distances(&Matrix::new(n, dim, data).unwrap()).unwrap()
    }

    fn diagram(deaths: &[f64]) -> PersistenceDiagramH0 {
        PersistenceDiagramH0::new(deaths.to_vec()).unwrap()
    }

    /// Decodes a Pruefer sequence into the labeled tree it encodes.
    fn pruefer_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
        let mut deg = vec![1usize; n];
        for &s in seq {
            deg[s] += 1;
        }
        let mut used = vec![false; n];
        let mut edges = Vec::with_capacity(n - 1);
        for &s in seq {
            let leaf = (0..n).find(|&v| !used[v] && deg[v] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            used[leaf] = true;
            deg[leaf] -= 1;
            deg[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| !used[v] && deg[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        edges
    }

    /// Minimum spanning-tree weight by enumerating all n^(n-2) labeled
    /// trees. Only viable for tiny n.
    fn exhaustive_mst_weight(d: &DistanceMatrix) -> f64 {
        let n = d.n();
        let mut best = f64::INFINITY;
        let count = (n as u64).pow(n as u32 - 2);
        for code in 0..count {
            let mut seq = Vec::with_capacity(n - 2);
            let mut c = code;
            for _ in 0..n - 2 {
                seq.push((c % n as u64) as usize);
                c /= n as u64;
            }
            let total: f64 = pruefer_tree(&seq, n)
                .iter()
                .map(|&(i, j)| d.get(i, j))
                .sum();
            if total < best {
                best = total;
            }
        }
        best
    }

    /// Independent H0 oracle: sweep all edges by increasing weight with a
    /// union-find, recording the radius of every component merge.
    fn union_find_deaths(d: &DistanceMatrix) -> Vec<f64> {
        let n = d.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((d.get(i, j), i, j));
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut deaths = Vec::with_capacity(n - 1);
        for (w, i, j) in edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                deaths.push(w);
            }
        }
        deaths
    }

    /// Exhaustive optimal-matching oracle; returns summed q-th-power cost.
    fn exhaustive_wasserstein_pow(a: &[f64], b: &[f64], q: f64) -> f64 {
        fn rec(i: usize, a: &[f64], b: &[f64], used: &mut [bool], acc: f64, best: &mut f64, q: f64) {
            if acc >= *best {
                return;
            }
            if i == a.len() {
                let mut total = acc;
                for (j, &u) in used.iter().enumerate() {
                    if !u {
                        total += pow_q(diagonal_gap(b[j]), q);
                    }
                }
                if total < *best {
                    *best = total;
                }
                return;
            }
            rec(i + 1, a, b, used, acc + pow_q(diagonal_gap(a[i]), q), best, q);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(i + 1, a, b, used, acc + pow_q(pair_gap(a[i], b[j]), q), best, q);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        let mut used = vec![false; b.len()];
        rec(0, a, b, &mut used, 0.0, &mut best, q);
        best
    }

    /// Exhaustive bottleneck oracle: minimize the maximum single-pair cost.
    fn exhaustive_bottleneck(a: &[f64], b: &[f64]) -> f64 {
        fn rec(i: usize, a: &[f64], b: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
            if acc >= *best {
                return;
            }
            if i == a.len() {
                let mut total = acc;
                for (j, &u) in used.iter().enumerate() {
                    if !u {
                        total = total.max(diagonal_gap(b[j]));
                    }
                }
                if total < *best {
                    *best = total;
                }
                return;
            }
            rec(i + 1, a, b, used, acc.max(diagonal_gap(a[i])), best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(i + 1, a, b, used, acc.max(pair_gap(a[i], b[j])), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        let mut used = vec![false; b.len()];
        rec(0, a, b, &mut used, 0.0, &mut best);
        best
    }

    fn random_diagram(rng: &mut Rng, max_len: usize) -> PersistenceDiagramH0 {
        let len = rng.index(max_len + 1);
        let deaths: Vec<f64> = (0..len).map(|_| rng.uniform_in(0.0, 3.0)).collect();
        PersistenceDiagramH0::new(deaths).unwrap()
    }

    #[test]
    fn two_points_give_a_single_edge() {
        let d = DistanceMatrix::new(Matrix::new(2, 2, vec![0.0, 5.0, 5.0, 0.0]).unwrap()).unwrap();
        let mst = minimum_spanning_tree(&d);
        assert_eq!(mst.edges(), &[MstEdge { i: 0, j: 1, weight: 5.0 }]);
        assert_eq!(h0_diagram(&d).deaths(), &[5.0]);
    }

    #[test]
    fn collinear_hand_case_excludes_the_long_edge() {
        let points = Matrix::new(3, 1, vec![0.0, 1.0, 3.0]).unwrap();
        let d = pairwise_distances(&points).unwrap();
        let mst = minimum_spanning_tree(&d);
        assert_eq!(
            mst.edges(),
            &[
                MstEdge { i: 0, j: 1, weight: 1.0 },
                MstEdge { i: 1, j: 2, weight: 2.0 },
            ]
        );
        assert_eq!(mst.total_weight(), 3.0);
    }

    #[test]
    fn equal_weight_ties_break_lexicographically() {
        // All distances identical: the tree must hang off vertex 0 in
        // index order.
        let mut m = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    m.set(i, j, 1.0);
                }
            }
        }
        let d = DistanceMatrix::new(m).unwrap();
        let mst = minimum_spanning_tree(&d);
        let pairs: Vec<(usize, usize)> = mst.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn tree_weight_matches_exhaustive_enumeration() {
        for seed in [1u64, 2, 3] {
            let d = random_distance_matrix(6, 3, seed);
            let mst = minimum_spanning_tree(&d);
            assert_eq!(mst.len(), 5);
            for e in mst.edges() {
                assert!(e.i < e.j);
            }
            let oracle = exhaustive_mst_weight(&d);
            assert!(
                (mst.total_weight() - oracle).abs() < 1e-12,
                "{} vs {oracle}",
                mst.total_weight()
            );
        }
    }

    #[test]
    fn single_point_has_an_empty_diagram() {
        let d = DistanceMatrix::new(Matrix::new(1, 1, vec![0.0]).unwrap()).unwrap();
        assert!(h0_diagram(&d).is_empty());
    }

    #[test]
    fn diagram_matches_union_find_filtration() {
        for seed in [4u64, 5, 6] {
            let d = random_distance_matrix(32, 4, seed);
            let diagram = h0_diagram(&d);
            assert_eq!(diagram.len(), 31);
            let mut oracle = union_find_deaths(&d);
            oracle.sort_by(f64::total_cmp);
            assert_eq!(diagram.deaths(), &oracle[..]);

            // Deaths are exactly the tree's weight multiset.
            let weights: Vec<f64> = minimum_spanning_tree(&d)
                .edges()
                .iter()
                .map(|e| e.weight)
                .collect();
            assert_eq!(diagram.deaths(), &weights[..]);
        }
    }

    #[test]
    fn diagram_is_invariant_under_point_relabeling() {
        let mut rng = Rng::new(7);
        let d = random_distance_matrix(20, 3, 8);
        let mut perm: Vec<usize> = (0..20).collect();
        rng.shuffle(&mut perm);
        let mut shuffled = Matrix::zeros(20, 20);
        for i in 0..20 {
            for j in 0..20 {
                shuffled.set(i, j, d.get(perm[i], perm[j]));
            }
        }
        let d_perm = DistanceMatrix::new(shuffled).unwrap();
        assert_eq!(h0_diagram(&d).deaths(), h0_diagram(&d_perm).deaths());
    }

    #[test]
    fn wasserstein_trivial_cases() {
        let a = diagram(&[1.0, 2.0, 3.0]);
        assert_eq!(wasserstein_h0(&a, &a, 1.0).unwrap(), 0.0);

        let single = diagram(&[2.0]);
        let empty = diagram(&[]);
        assert_eq!(wasserstein_h0(&single, &empty, 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein_h0(&empty, &empty, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_rejects_orders_below_one() {
        let a = diagram(&[1.0]);
        assert!(wasserstein_h0(&a, &a, 0.5).is_err());
        assert!(wasserstein_h0(&a, &a, f64::NAN).is_err());
    }

    #[test]
    fn wasserstein_matches_exhaustive_matching() {
        let mut rng = Rng::new(9);
        for (la, lb) in [(5, 5), (4, 6), (0, 3), (6, 2)] {
            for q in [1.0, 2.0] {
                let a: Vec<f64> = (0..la).map(|_| rng.uniform_in(0.0, 3.0)).collect();
                let b: Vec<f64> = (0..lb).map(|_| rng.uniform_in(0.0, 3.0)).collect();
                let got = wasserstein_h0(&diagram(&a), &diagram(&b), q).unwrap();
                let oracle = exhaustive_wasserstein_pow(&a, &b, q);
                let oracle = if q == 1.0 { oracle } else { oracle.powf(1.0 / q) };
                assert!((got - oracle).abs() < 1e-9, "q={q}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn wasserstein_behaves_like_a_metric_on_small_diagrams() {
        let mut rng = Rng::new(10);
        for _ in 0..30 {
            let a = random_diagram(&mut rng, 6);
            let b = random_diagram(&mut rng, 6);
            let c = random_diagram(&mut rng, 6);
            let ab = wasserstein_h0(&a, &b, 1.0).unwrap();
            let ba = wasserstein_h0(&b, &a, 1.0).unwrap();
            assert_eq!(ab, ba);
            assert_eq!(wasserstein_h0(&a, &a, 1.0).unwrap(), 0.0);
            let ac = wasserstein_h0(&a, &c, 1.0).unwrap();
            let cb = wasserstein_h0(&c, &b, 1.0).unwrap();
            assert!(ab <= ac + cb + 1e-9, "{ab} > {ac} + {cb}");
        }
    }

    #[test]
    fn bottleneck_trivial_cases() {
        let a = diagram(&[1.0, 2.0]);
        assert_eq!(bottleneck_h0(&a, &a), 0.0);
        let shifted = diagram(&[1.0 + 1e-3, 2.0]);
        assert!((bottleneck_h0(&a, &shifted) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn bottleneck_matches_exhaustive_matching() {
        let mut rng = Rng::new(11);
        for (la, lb) in [(5, 5), (3, 6), (0, 4), (6, 1)] {
            let a: Vec<f64> = (0..la).map(|_| rng.uniform_in(0.0, 3.0)).collect();
            let b: Vec<f64> = (0..lb).map(|_| rng.uniform_in(0.0, 3.0)).collect();
            let got = bottleneck_h0(&diagram(&a), &diagram(&b));
            let oracle = exhaustive_bottleneck(&a, &b);
            assert_eq!(got, oracle, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn bottleneck_is_stable_under_distance_perturbations() {
        // Entrywise perturbations of size <= eps move the diagram by at
        // most 2*eps in bottleneck distance.
        let mut rng = Rng::new(12);
        let mut trials = 0;
        while trials < 120 {
            let n = [8, 16, 24, 32][trials % 4];
            let eps = [1e-3, 1e-2, 1e-1][trials % 3];
            let d = random_distance_matrix(n, 3, 100 + trials as u64);
            let mut perturbed = d.as_matrix().clone();
            for i in 0..n {
                for j in i + 1..n {
                    let delta = rng.uniform_in(-eps, eps);
                    let v = (d.get(i, j) + delta).max(0.0);
                    perturbed.set(i, j, v);
                    perturbed.set(j, i, v);
                }
            }
            let d2 = DistanceMatrix::new(perturbed).unwrap();
            let gap = bottleneck_h0(&h0_diagram(&d), &h0_diagram(&d2));
            assert!(gap <= 2.0 * eps + 1e-12, "n={n} eps={eps}: gap {gap}");
            trials += 1;
        }
    }

    #[test]
    fn well_separated_components_merge_last() {
        let cfg = ConcentricSpheresConfig {
            n_per_shell: 300,
            dim: 3,
            radii: vec![2.0, 4.0],
            noise_sd: 0.0,
        };
        let cloud = concentric_spheres(&cfg, 13).unwrap();
        let d = pairwise_distances(&cloud.points).unwrap();
        let labels = cloud.labels.as_ref().unwrap();

        let mut min_cross = f64::INFINITY;
        for i in 0..cloud.n() {
            for j in i + 1..cloud.n() {
                if labels[i] != labels[j] {
                    min_cross = min_cross.min(d.get(i, j));
                }
            }
        }

        let deaths = h0_diagram(&d);
        let deaths = deaths.deaths();
        let largest = deaths[deaths.len() - 1];
        let second = deaths[deaths.len() - 2];
        // The final merge is the single-linkage gap between the shells,
        // and every intra-shell merge happens strictly earlier.
        assert_eq!(largest, min_cross);
        assert!(second < min_cross);
    }

    #[test]
    fn diagram_csv_has_exact_layout() {
        let d = diagram(&[1.5, 2.5]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "birth,death\n\
             0.0000000000000000e0,1.5000000000000000e0\n\
             0.0000000000000000e0,2.5000000000000000e0\n"
        );
    }

    #[test]
    fn diagram_rejects_bad_deaths() {
        assert!(PersistenceDiagramH0::new(vec![-1.0]).is_err());
        assert!(PersistenceDiagramH0::new(vec![f64::NAN]).is_err());
        assert!(PersistenceDiagramH0::new(vec![f64::INFINITY]).is_err());
    }
}
