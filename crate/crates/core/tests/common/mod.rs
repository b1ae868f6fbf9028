#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use ocd_core::{load_edge_list, Cover, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    match std::env::var_os("OCD_DATA_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data"),
    }
}

pub fn karate() -> Graph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/karate.txt");
    load_edge_list(BufReader::new(File::open(path).unwrap()), false, false).unwrap()
}

/// G(n, p) plus a random spanning tree, so the result is connected.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((order[i], order[j]));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, false, edges).unwrap()
}

/// Random arcs plus a shuffled Hamiltonian cycle, so the result is strongly
/// connected.
pub fn strong_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut arcs: Vec<(usize, usize)> = (0..n).map(|i| (order[i], order[(i + 1) % n])).collect();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                arcs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, true, arcs).unwrap()
}

/// Random cover with `k` nonempty communities; every vertex is in at least one.
pub fn random_cover(rng: &mut ChaCha8Rng, n: usize, k: usize, extra: f64) -> Cover {
    let mut groups = vec![Vec::new(); k];
    for u in 0..n {
        let home = if u < k { u } else { rng.random_range(0..k) };
        groups[home].push(u);
        for (j, g) in groups.iter_mut().enumerate() {
            if j != home && rng.random::<f64>() < extra {
                g.push(u);
            }
        }
    }
    Cover::new(n, groups).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.arcs() {
        a[u][v] = 1.0;
    }
    a
}

pub fn dense_transition(g: &Graph) -> Vec<Vec<f64>> {
    let mut p = dense_adjacency(g);
    for row in &mut p {
        let d: f64 = row.iter().sum();
        if d > 0.0 {
            row.iter_mut().for_each(|x| *x /= d);
        }
    }
    p
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l] != 0.0 {
                for j in 0..m {
                    c[i][j] += a[i][l] * b[l][j];
                }
            }
        }
    }
    c
}

/// Literal belonging coefficient: edges from `u` into `C_j` over edges from
/// `u` into all communities containing `u`.
pub fn brute_alpha(g: &Graph, cover: &Cover, u: usize, j: usize) -> f64 {
    if !cover.community(j).contains(&u) {
        return 0.0;
    }
    let a = dense_adjacency(g);
    let into = |c: &[usize]| c.iter().map(|&v| a[u][v]).sum::<f64>();
    let total: f64 = cover
        .communities()
        .iter()
        .filter(|c| c.contains(&u))
        .map(|c| into(c))
        .sum();
    if total == 0.0 {
        0.0
    } else {
        into(cover.community(j)) / total
    }
}

pub fn brute_overlap_modularity(g: &Graph, cover: &Cover, product: bool) -> f64 {
    let a = dense_adjacency(g);
    let two_m = 2.0 * g.m() as f64;
    let mut q = 0.0;
    for (j, c) in cover.communities().iter().enumerate() {
        for &u in c {
            for &v in c {
                let (au, av) = (brute_alpha(g, cover, u, j), brute_alpha(g, cover, v, j));
                let weight = if product { au * av } else { (au + av) / 2.0 };
                q += weight * (a[u][v] - (g.degree(u) * g.degree(v)) as f64 / two_m);
            }
        }
    }
    q / two_m
}

/// `(1/2m) Σ_{u,v∈C} (A_uv - θ d_u d_v / 2m)` for one vertex set.
pub fn brute_theta_set(g: &Graph, set: &[usize], theta: f64) -> f64 {
    let a = dense_adjacency(g);
    let two_m = 2.0 * g.m() as f64;
    let mut q = 0.0;
    for &u in set {
        for &v in set {
            q += a[u][v] - theta * (g.degree(u) * g.degree(v)) as f64 / two_m;
        }
    }
    q / two_m
}

pub fn brute_theta_undirected(g: &Graph, cover: &Cover, theta: f64) -> f64 {
    cover.communities().iter().map(|c| brute_theta_set(g, c, theta)).sum()
}

pub fn brute_theta_d(g: &Graph, cover: &Cover, theta: f64) -> f64 {
    let a = dense_adjacency(g);
    let m = g.m() as f64;
    let mut q = 0.0;
    for c in cover.communities() {
        for &u in c {
            for &v in c {
                q += a[u][v] - theta * (g.out_degree(u) * g.in_degree(v)) as f64 / m;
            }
        }
    }
    q / m
}

pub fn brute_theta_sd(g: &Graph, cover: &Cover, phi: &[f64], theta: f64) -> f64 {
    let p = dense_transition(g);
    let mut q = 0.0;
    for c in cover.communities() {
        for &u in c {
            for &v in c {
                q += phi[u] * p[u][v] - theta * phi[u] * phi[v];
            }
        }
    }
    q
}
