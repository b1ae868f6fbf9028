//! Cover quality: belonging coefficients, overlapping modularity (average
//! and product belonging), θ-modularity of covers, and overlapping NMI.

use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::walks::StationaryDistribution;

/// `alpha[u][j] = d_{u,C_j} / Σ_{i : u ∈ C_i} d_{u,C_i}` for `u ∈ C_j`, else 0,
/// where `d_{u,C} = Σ_{v∈C} A_uv`. A vertex with no edges into any of its
/// communities gets all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BelongingMatrix {
    pub alpha: Vec<Vec<f64>>,
}

impl BelongingMatrix {
    pub fn get(&self, u: usize, j: usize) -> f64 {
        self.alpha[u][j]
    }
}

/// Edges from `u` into each community of `cover` (out-arcs for digraphs).
fn links_into(graph: &Graph, cover: &Cover, memberships: &[Vec<usize>], u: usize) -> Vec<f64> {
    let mut links = vec![0.0; cover.k()];
    for &v in graph.out_neighbors(u) {
        for &j in &memberships[v] {
            links[j] += 1.0;
        }
    }
    links
}

pub fn belonging_coefficients(graph: &Graph, cover: &Cover) -> Result<BelongingMatrix> {
    if cover.n() != graph.n() {
        return Err(Error::UniverseMismatch(cover.n(), graph.n()));
    }
    let memberships = cover.memberships();
    let alpha = (0..graph.n())
        .map(|u| {
            let links = links_into(graph, cover, &memberships, u);
            let own = &memberships[u];
            let total: f64 = own.iter().map(|&j| links[j]).sum();
            let mut row = vec![0.0; cover.k()];
            if total > 0.0 {
                for &j in own {
                    row[j] = links[j] / total;
                }
            }
            row
        })
        .collect();
    Ok(BelongingMatrix { alpha })
}

/// `Σ_{u,v∈C} A_uv f(α_u, α_v)` and `Σ_{u∈C} α_u d_u` for one community,
/// with `f` the average or the product.
fn community_terms(graph: &Graph, members: &[usize], alpha: &dyn Fn(usize) -> f64, product: bool) -> (f64, f64) {
    let mut inside = vec![false; graph.n()];
    for &u in members {
        inside[u] = true;
    }
    let mut adjacency = 0.0;
    let mut weighted_degree = 0.0;
    for &u in members {
        let au = alpha(u);
        weighted_degree += au * graph.degree(u) as f64;
        for &v in graph.out_neighbors(u).iter().filter(|&&v| inside[v]) {
            adjacency += if product { au * alpha(v) } else { 0.5 * (au + alpha(v)) };
        }
    }
    (adjacency, weighted_degree)
}

fn overlap_modularity(graph: &Graph, cover: &Cover, product: bool) -> Result<f64> {
    if graph.is_directed() {
        return Err(Error::RequiresUndirected("overlapping modularity"));
    }
    let belonging = belonging_coefficients(graph, cover)?;
    let d = graph.arc_count() as f64;
    if d == 0.0 {
        return Ok(0.0);
    }
    let mut q = 0.0;
    for (j, members) in cover.communities().iter().enumerate() {
        let alpha = |u: usize| belonging.get(u, j);
        let (adjacency, weighted) = community_terms(graph, members, &alpha, product);
        let total_degree: f64 = members.iter().map(|&u| graph.degree(u) as f64).sum();
        // null term: Σ_{u,v∈C} d_u d_v / d · f(α_u, α_v)
        let null = if product {
            weighted * weighted / d
        } else {
            weighted * total_degree / d
        };
        q += adjacency - null;
    }
    Ok(q / d)
}

/// `(1/2m) Σ_j Σ_{u,v∈C_j} (A_uv - d_u d_v / 2m) (α_{uC_j} + α_{vC_j}) / 2`.
pub fn overlap_modularity_avg(graph: &Graph, cover: &Cover) -> Result<f64> {
    overlap_modularity(graph, cover, false)
}

/// `Q0 = (1/2m) Σ_j Σ_{u,v} α_{uC_j} α_{vC_j} (A_uv - d_u d_v / 2m)`.
pub fn overlap_modularity_q0(graph: &Graph, cover: &Cover) -> Result<f64> {
    overlap_modularity(graph, cover, true)
}

#[derive(Debug, Clone, Copy)]
pub enum ThetaVariant<'a> {
    /// `(1/2m) Σ_j Σ_{u,v∈C_j} (A_uv - θ d_u d_v / 2m)`
    Undirected,
    /// `(1/m) Σ_j Σ_{u,v∈C_j} (A_uv - θ d_in(u) d_out(v) / m)`
    DirectedD,
    /// `Σ_j Σ_{u,v∈C_j} (P_vu φ_v - θ φ_u φ_v)`
    DirectedSd(&'a StationaryDistribution),
}

/// θ-modularity of a cover; a vertex in several communities contributes to
/// each of them.
pub fn theta_modularity(graph: &Graph, cover: &Cover, theta: f64, variant: ThetaVariant<'_>) -> Result<f64> {
    if cover.n() != graph.n() {
        return Err(Error::UniverseMismatch(cover.n(), graph.n()));
    }
    match variant {
        ThetaVariant::Undirected if graph.is_directed() => return Err(Error::RequiresUndirected("undirected θ-modularity")),
        ThetaVariant::DirectedD | ThetaVariant::DirectedSd(_) if !graph.is_directed() => {
            return Err(Error::RequiresDirected("directed θ-modularity"))
        }
        ThetaVariant::DirectedSd(_) if !graph.is_strongly_connected() => {
            return Err(Error::NotStronglyConnected("sd θ-modularity"))
        }
        _ => {}
    }
    let total = graph.arc_count() as f64;
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut inside = vec![false; graph.n()];
    let mut q = 0.0;
    for members in cover.communities() {
        for &u in members {
            inside[u] = true;
        }
        match variant {
            ThetaVariant::Undirected | ThetaVariant::DirectedD => {
                let arcs: usize = members
                    .iter()
                    .map(|&u| graph.out_neighbors(u).iter().filter(|&&v| inside[v]).count())
                    .sum();
                let din: f64 = members.iter().map(|&u| graph.in_degree(u) as f64).sum();
                let dout: f64 = members.iter().map(|&u| graph.out_degree(u) as f64).sum();
                q += (arcs as f64 - theta * din * dout / total) / total;
            }
            ThetaVariant::DirectedSd(phi) => {
                let mut flow = 0.0;
                let mut mass = 0.0;
                for &v in members {
                    mass += phi.phi[v];
                    let share = phi.phi[v] / graph.out_degree(v) as f64;
                    flow += share * graph.out_neighbors(v).iter().filter(|&&u| inside[u]).count() as f64;
                }
                q += flow - theta * mass * mass;
            }
        }
        for &u in members {
            inside[u] = false;
        }
    }
    Ok(q)
}

/// `-p log2 p`, with `0 log 0 = 0`.
fn h(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn binary_entropy(size: usize, n: f64) -> f64 {
    let p = size as f64 / n;
    h(p) + h(1.0 - p)
}

fn intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// `H(X_i | Y_j)` for the binary membership variables of `x` and `y`, or
/// `None` when the pairing is rejected because
/// `h(p11) + h(p00) < h(p01) + h(p10)`.
fn conditional(x: &[usize], y: &[usize], n: f64) -> Option<f64> {
    let both = intersection(x, y) as f64;
    let p11 = both / n;
    let p10 = (x.len() as f64 - both) / n;
    let p01 = (y.len() as f64 - both) / n;
    let p00 = 1.0 - p11 - p10 - p01;
    if h(p11) + h(p00) < h(p01) + h(p10) {
        return None;
    }
    let joint = h(p11) + h(p10) + h(p01) + h(p00);
    Some(joint - binary_entropy(y.len(), n))
}

/// `H(A | B) = Σ_i min_j H(X_i | Y_j)` (falling back to `H(X_i)`), and `H(A)`.
fn cover_conditional(a: &Cover, b: &Cover, n: f64) -> (f64, f64) {
    let mut conditional_sum = 0.0;
    let mut entropy = 0.0;
    for x in a.communities() {
        let hx = binary_entropy(x.len(), n);
        entropy += hx;
        let best = b
            .communities()
            .iter()
            .filter_map(|y| conditional(x, y, n))
            .fold(hx, f64::min);
        conditional_sum += best;
    }
    (conditional_sum, entropy)
}

/// Overlapping NMI: `2 MI / (H(A) + H(B))` with
/// `MI = ½ [(H(A) - H(A|B)) + (H(B) - H(B|A))]`, clamped to `[0, 1]`.
pub fn onmi(a: &Cover, b: &Cover) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::UniverseMismatch(a.n(), b.n()));
    }
    if a.k() == 0 || b.k() == 0 {
        return Err(Error::InvalidParameter("ONMI of an empty cover".into()));
    }
    let n = a.n() as f64;
    let (h_a_given_b, h_a) = cover_conditional(a, b, n);
    let (h_b_given_a, h_b) = cover_conditional(b, a, n);
    let denominator = h_a + h_b;
    if denominator == 0.0 {
        return if a.same_as(b) {
            Ok(1.0)
        } else {
            Err(Error::InvalidParameter("ONMI undefined: both covers have zero entropy".into()))
        };
    }
    let mi = 0.5 * ((h_a - h_a_given_b) + (h_b - h_b_given_a));
    Ok((2.0 * mi / denominator).clamp(0.0, 1.0))
}

/// One metric in a JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub value: f64,
    pub params: serde_json::Value,
}

impl MetricRow {
    pub fn new(metric: &str, value: f64, params: serde_json::Value) -> Self {
        MetricRow { metric: metric.to_string(), value, params }
    }
}
