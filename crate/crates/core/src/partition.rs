//! Step one: disjoint clustering.
//!
//! Louvain works on a weighted digraph with self-loops throughout; an
//! undirected graph enters as its symmetric digraph, for which the directed
//! modularity `(1/M) Σ_C (e_C - Din_C Dout_C / M)` with `M = 2m` is exactly
//! the classical undirected modularity. So both variants share one optimiser.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::walks::{diplacian_embedding, Embedding};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub seed: u64,
    /// Aggregation levels for Louvain.
    pub max_passes: usize,
    /// A level improving modularity by less than this ends Louvain.
    pub min_gain: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig { seed: 0, max_passes: 100, min_gain: 1e-9 }
    }
}

impl ClusteringConfig {
    pub fn with_seed(seed: u64) -> Self {
        ClusteringConfig { seed, ..Default::default() }
    }
}

/// Modularity of a partition: `(1/2m) Σ_C Σ_{u,v∈C} (A_uv - d_u d_v / 2m)`
/// for undirected graphs, `(1/m) Σ_C Σ_{u,v∈C} (A_uv - d_in(u) d_out(v) / m)`
/// for digraphs.
pub fn modularity(graph: &Graph, partition: &Partition) -> f64 {
    let total = graph.arc_count() as f64;
    if total == 0.0 {
        return 0.0;
    }
    let k = partition.k();
    let mut internal = vec![0.0; k];
    let mut din = vec![0.0; k];
    let mut dout = vec![0.0; k];
    for u in 0..graph.n() {
        let c = partition.label(u);
        din[c] += graph.in_degree(u) as f64;
        dout[c] += graph.out_degree(u) as f64;
        internal[c] += graph.out_neighbors(u).iter().filter(|&&v| partition.label(v) == c).count() as f64;
    }
    (0..k).map(|c| internal[c] - din[c] * dout[c] / total).sum::<f64>() / total
}

/// Weighted digraph used between Louvain levels.
struct Level {
    out: Vec<Vec<(usize, f64)>>,
    inn: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    dout: Vec<f64>,
    din: Vec<f64>,
    total: f64,
}

impl Level {
    fn from_graph(graph: &Graph) -> Self {
        let n = graph.n();
        let out: Vec<Vec<(usize, f64)>> =
            (0..n).map(|u| graph.out_neighbors(u).iter().map(|&v| (v, 1.0)).collect()).collect();
        let inn: Vec<Vec<(usize, f64)>> =
            (0..n).map(|u| graph.in_neighbors(u).iter().map(|&v| (v, 1.0)).collect()).collect();
        Level {
            dout: (0..n).map(|u| graph.out_degree(u) as f64).collect(),
            din: (0..n).map(|u| graph.in_degree(u) as f64).collect(),
            self_loop: vec![0.0; n],
            total: graph.arc_count() as f64,
            out,
            inn,
        }
    }

    fn n(&self) -> usize {
        self.out.len()
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut internal = vec![0.0; k];
        let mut din = vec![0.0; k];
        let mut dout = vec![0.0; k];
        for u in 0..self.n() {
            let c = community[u];
            din[c] += self.din[u];
            dout[c] += self.dout[u];
            internal[c] += self.self_loop[u];
            internal[c] += self.out[u].iter().filter(|(v, _)| community[*v] == c).map(|(_, w)| w).sum::<f64>();
        }
        (0..k).map(|c| internal[c] - din[c] * dout[c] / self.total).sum::<f64>() / self.total
    }

    /// Local moves until no vertex changes community. Returns whether
    /// anything moved.
    fn local_moves(&self, community: &mut [usize], rng: &mut ChaCha8Rng) -> bool {
        let n = self.n();
        let m = self.total;
        let mut tot_in = vec![0.0; n];
        let mut tot_out = vec![0.0; n];
        for u in 0..n {
            tot_in[community[u]] += self.din[u];
            tot_out[community[u]] += self.dout[u];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut links: BTreeMap<usize, f64> = BTreeMap::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &u in &order {
                let own = community[u];
                tot_in[own] -= self.din[u];
                tot_out[own] -= self.dout[u];
                links.clear();
                links.insert(own, 0.0);
                for &(v, w) in self.out[u].iter().chain(&self.inn[u]) {
                    if v != u {
                        *links.entry(community[v]).or_insert(0.0) += w;
                    }
                }
                let gain = |c: usize, w: f64| w - (self.din[u] * tot_out[c] + self.dout[u] * tot_in[c]) / m;
                let own_gain = gain(own, links[&own]);
                let mut best = (usize::MAX, f64::NEG_INFINITY);
                // ascending ids, strict improvement: ties keep the lowest id
                for (&c, &w) in &links {
                    let g = gain(c, w);
                    if g > best.1 + 1e-12 {
                        best = (c, g);
                    }
                }
                let target = if best.1 > own_gain + 1e-12 { best.0 } else { own };
                community[u] = target;
                tot_in[target] += self.din[u];
                tot_out[target] += self.dout[u];
                if target != own {
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                return moved_any;
            }
        }
    }

    fn aggregate(&self, community: &[usize], k: usize) -> Level {
        let mut out_maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut self_loop = vec![0.0; k];
        let mut dout = vec![0.0; k];
        let mut din = vec![0.0; k];
        for u in 0..self.n() {
            let cu = community[u];
            dout[cu] += self.dout[u];
            din[cu] += self.din[u];
            self_loop[cu] += self.self_loop[u];
            for &(v, w) in &self.out[u] {
                let cv = community[v];
                if cu == cv {
                    self_loop[cu] += w;
                } else {
                    *out_maps[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let mut inn = vec![Vec::new(); k];
        let out: Vec<Vec<(usize, f64)>> = out_maps
            .into_iter()
            .enumerate()
            .map(|(c, map)| {
                map.into_iter()
                    .inspect(|&(d, w)| inn[d].push((c, w)))
                    .collect()
            })
            .collect();
        Level { out, inn, self_loop, dout, din, total: self.total }
    }
}

/// Compacts community ids to `0..k` preserving the order of first appearance.
fn compact(community: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    for c in community.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

/// Two-phase Louvain maximising the modularity variant matching the graph's
/// directedness. Vertex visit order is a seeded shuffle; the best-gain move
/// wins, ties going to the lowest community id.
pub fn louvain(graph: &Graph, config: &ClusteringConfig) -> Partition {
    let n = graph.n();
    if graph.arc_count() == 0 {
        return Partition::singletons(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut level = Level::from_graph(graph);
    // membership[u] = node of the current level containing original vertex u
    let mut membership: Vec<usize> = (0..n).collect();
    let mut current_q = level.modularity(&(0..n).collect::<Vec<_>>());
    for _ in 0..config.max_passes.max(1) {
        let mut community: Vec<usize> = (0..level.n()).collect();
        if !level.local_moves(&mut community, &mut rng) {
            break;
        }
        let k = compact(&mut community);
        let q = level.modularity(&community);
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        level = level.aggregate(&community, k);
        let improved = q - current_q;
        current_q = q;
        if improved < config.min_gain {
            break;
        }
    }
    Partition::from_labels(&membership)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with k-means++ seeding. Empty clusters are re-seeded
/// from the point farthest from its assigned center.
pub fn kmeans(points: &Embedding, k: usize, seed: u64, max_iter: usize) -> Vec<usize> {
    let n = points.len();
    let dim = points.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points.row(rng.random_range(0..n)).to_vec());
    let mut nearest: Vec<f64> = (0..n).map(|u| sq_dist(points.row(u), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (u, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = u;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(points.row(pick).to_vec());
        for (u, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(u), centers.last().unwrap()));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for u in 0..n {
            let row = points.row(u);
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(row, center);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if labels[u] != best.0 {
                labels[u] = best.0;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for u in 0..n {
            counts[labels[u]] += 1;
            for (s, x) in sums[labels[u]].iter_mut().zip(points.row(u)) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&u| counts[labels[u]] > 1)
                    .max_by(|&a, &b| {
                        let da = sq_dist(points.row(a), &centers[labels[a]]);
                        let db = sq_dist(points.row(b), &centers[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    });
                if let Some(u) = far {
                    counts[labels[u]] -= 1;
                    for (s, x) in sums[labels[u]].iter_mut().zip(points.row(u)) {
                        *s -= x;
                    }
                    labels[u] = c;
                    counts[c] = 1;
                    sums[c] = points.row(u).to_vec();
                    changed = true;
                }
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

/// Spectral step one for digraphs: k-means on the Diplacian embedding.
pub fn spectral_partition(graph: &Graph, k: usize, config: &ClusteringConfig) -> Result<Partition> {
    let n = graph.n();
    if k == n {
        return Ok(Partition::singletons(n));
    }
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("cluster count k = {k} must satisfy 2 <= k <= n = {n}")));
    }
    let embedding = diplacian_embedding(graph, k)?;
    Ok(Partition::from_labels(&kmeans(&embedding, k, config.seed, 100)))
}
