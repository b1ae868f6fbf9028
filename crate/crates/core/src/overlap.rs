//! Step two: membership expansion.
//!
//! Every rule starts from a disjoint partition and only ever adds vertices
//! to communities. The modularity-family rules share one multi-pass engine:
//! vertices in ascending order, candidate communities (those with at least
//! one edge to the vertex, either direction) in ascending order, admissions
//! visible immediately, repeated until a pass admits nothing. The cosine
//! rules and the baseline fraction rule are single passes against the
//! original partition.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{Cover, Partition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{louvain, spectral_partition, ClusteringConfig};
use crate::walks::{diplacian_embedding, stationary_with, walktrap_embedding, Embedding, StationaryDistribution, StationaryOptions};

pub const DEFAULT_WALK_LENGTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Undirected θ-modularity gain.
    ParametModul,
    /// Directed θ-modularity gain with the `d_in d_out / m` null model.
    DiParametD,
    /// Directed θ-modularity gain built on the stationary distribution.
    DiParametSd,
    /// Cosine to cluster centers of walk-profile coordinates.
    Cosine,
    /// Cosine to cluster centers of Diplacian coordinates.
    DiCosine,
    /// Fraction of neighbours inside the community.
    BaselineParamet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Modularity,
    Cosine,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepOne {
    Louvain,
    Spectral,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::ParametModul,
        Algorithm::DiParametD,
        Algorithm::DiParametSd,
        Algorithm::Cosine,
        Algorithm::DiCosine,
        Algorithm::BaselineParamet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ParametModul => "paramet-modul",
            Algorithm::DiParametD => "di-paramet-d",
            Algorithm::DiParametSd => "di-paramet-sd",
            Algorithm::Cosine => "cosine",
            Algorithm::DiCosine => "di-cosine",
            Algorithm::BaselineParamet => "baseline-paramet",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Algorithm::ParametModul | Algorithm::DiParametD | Algorithm::DiParametSd => Family::Modularity,
            Algorithm::Cosine | Algorithm::DiCosine => Family::Cosine,
            Algorithm::BaselineParamet => Family::Baseline,
        }
    }

    pub fn directed(self) -> bool {
        matches!(self, Algorithm::DiParametD | Algorithm::DiParametSd | Algorithm::DiCosine)
    }

    pub fn step_one(self) -> StepOne {
        match self {
            Algorithm::DiCosine => StepOne::Spectral,
            _ => StepOne::Louvain,
        }
    }

    /// Twenty-point θ grid: `1 + 0.1t` for the modularity family,
    /// `0.2 + 0.035t` for the cosine family, `0.2 + 0.015t` for the
    /// baseline, with `t = 1..=20`.
    pub fn default_grid(self) -> Vec<f64> {
        let (base, step) = match self.family() {
            Family::Modularity => (1000.0, 100.0),
            Family::Cosine => (200.0, 35.0),
            Family::Baseline => (200.0, 15.0),
        };
        (1..=20).map(|t| (base + step * t as f64) / 1000.0).collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapParams {
    pub theta: f64,
    /// Walk length for the walk-profile embedding.
    pub t: usize,
    /// Diplacian embedding dimension; `None` uses the partition's community count.
    pub k: Option<usize>,
    /// Pass cap for the multi-pass engine; `None` means `n k + 1`.
    pub max_passes: Option<usize>,
    pub record_decisions: bool,
    /// Teleportation for the stationary distribution (sd rule only).
    pub teleport: Option<f64>,
}

impl Default for OverlapParams {
    fn default() -> Self {
        OverlapParams {
            theta: 1.0,
            t: DEFAULT_WALK_LENGTH,
            k: None,
            max_passes: None,
            record_decisions: false,
            teleport: None,
        }
    }
}

impl OverlapParams {
    pub fn with_theta(theta: f64) -> Self {
        OverlapParams { theta, ..Default::default() }
    }

    pub fn recording(mut self) -> Self {
        self.record_decisions = true;
        self
    }

    pub fn validate(&self, family: Family) -> Result<()> {
        let theta = self.theta;
        let ok = match family {
            Family::Modularity => theta > 0.0 && !theta.is_nan(),
            Family::Cosine => theta > 0.0 && theta <= 1.0,
            Family::Baseline => (0.0..=1.0).contains(&theta),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("theta = {theta} out of range for this rule")));
        }
        if self.t == 0 {
            return Err(Error::InvalidParameter("walk length t must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidParameter("embedding dimension k must be at least 1".into()));
        }
        Ok(())
    }
}

/// One evaluated admission test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipDecision {
    pub vertex: usize,
    pub community: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub accepted: bool,
    pub pass: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapOutcome {
    pub cover: Cover,
    pub decisions: Vec<MembershipDecision>,
    pub passes: usize,
}

/// `ΔQ(θ)_{u,C} = (1/2m) Σ_{w∈C} (A_uw - θ d_u d_w / 2m)` (undirected).
pub fn delta_q_theta(graph: &Graph, community: &[usize], u: usize, theta: f64) -> f64 {
    let d = graph.arc_count() as f64;
    let du = graph.degree(u) as f64;
    community
        .iter()
        .map(|&w| graph.adjacency(u, w) - theta * du * graph.degree(w) as f64 / d)
        .sum::<f64>()
        / d
}

/// Directed two-sided gain
/// `(1/m) Σ_{w∈C} (A_uw - θ d_in(u) d_out(w)/m) + (1/m) Σ_{w∈C} (A_wu - θ d_in(w) d_out(u)/m)`.
pub fn delta_q_d_theta(graph: &Graph, community: &[usize], u: usize, theta: f64) -> f64 {
    let m = graph.m() as f64;
    let (din_u, dout_u) = (graph.in_degree(u) as f64, graph.out_degree(u) as f64);
    community
        .iter()
        .map(|&w| {
            let (din_w, dout_w) = (graph.in_degree(w) as f64, graph.out_degree(w) as f64);
            (graph.adjacency(u, w) - theta * din_u * dout_w / m) + (graph.adjacency(w, u) - theta * din_w * dout_u / m)
        })
        .sum::<f64>()
        / m
}

/// Stationary-distribution gain
/// `Σ_{w∈C} (φ_u P_uw - θ φ_u φ_w) + Σ_{w∈C} (φ_w P_wu - θ φ_u φ_w)`.
pub fn delta_q_sd_theta(graph: &Graph, phi: &StationaryDistribution, community: &[usize], u: usize, theta: f64) -> f64 {
    let p = |a: usize, b: usize| graph.adjacency(a, b) / graph.out_degree(a).max(1) as f64;
    let pu = phi.phi[u];
    community
        .iter()
        .map(|&w| {
            let pw = phi.phi[w];
            (pu * p(u, w) - theta * pu * pw) + (pw * p(w, u) - theta * pu * pw)
        })
        .sum()
}

#[derive(Clone, Copy)]
enum GainRule<'a> {
    Undirected,
    DirectedD,
    DirectedSd { phi: &'a [f64], teleport: f64 },
}

/// Running sums over a community's current members.
#[derive(Clone, Default)]
struct CommunityStats {
    size: f64,
    din: f64,
    dout: f64,
    phi: f64,
    phi_sinks: f64,
}

struct Engine<'a> {
    graph: &'a Graph,
    rule: GainRule<'a>,
    theta: f64,
    communities: Vec<Vec<usize>>,
    memberships: Vec<Vec<usize>>,
    stats: Vec<CommunityStats>,
}

impl<'a> Engine<'a> {
    fn new(graph: &'a Graph, partition: &Partition, rule: GainRule<'a>, theta: f64) -> Self {
        let mut engine = Engine {
            graph,
            rule,
            theta,
            communities: vec![Vec::new(); partition.k()],
            memberships: vec![Vec::new(); graph.n()],
            stats: vec![CommunityStats::default(); partition.k()],
        };
        for u in 0..graph.n() {
            engine.add(u, partition.label(u));
        }
        engine
    }

    fn add(&mut self, u: usize, c: usize) {
        let g = self.graph;
        self.communities[c].push(u);
        self.memberships[u].push(c);
        let s = &mut self.stats[c];
        s.size += 1.0;
        s.din += g.in_degree(u) as f64;
        s.dout += g.out_degree(u) as f64;
        if let GainRule::DirectedSd { phi, .. } = self.rule {
            if g.out_degree(u) == 0 {
                s.phi_sinks += phi[u];
            } else {
                s.phi += phi[u];
            }
        }
    }

    /// Admission test `(lhs, rhs)` for `u` against community `c`, given the
    /// number of out- and in-neighbours of `u` in `c` and the stationary
    /// inflow `Σ_{w∈c, w→u} φ_w / d_out(w)`.
    fn test(&self, u: usize, c: usize, out_links: f64, in_links: f64, inflow: f64) -> (f64, f64) {
        let g = self.graph;
        let s = &self.stats[c];
        let theta = self.theta;
        match self.rule {
            GainRule::Undirected => {
                let d = g.arc_count() as f64;
                (out_links / g.degree(u) as f64, theta * s.dout / d)
            }
            GainRule::DirectedD => {
                let m = g.m() as f64;
                let rhs = theta * (g.in_degree(u) as f64 * s.dout + g.out_degree(u) as f64 * s.din) / m;
                (out_links + in_links, rhs)
            }
            GainRule::DirectedSd { phi, teleport } => {
                let n = g.n() as f64;
                let pu = phi[u];
                let dout = g.out_degree(u) as f64;
                let to_c = if dout > 0.0 {
                    (1.0 - teleport) * out_links / dout + teleport * s.size / n
                } else {
                    s.size / n
                };
                let from_c = (1.0 - teleport) * inflow + teleport * s.phi / n + s.phi_sinks / n;
                (pu * to_c + from_c, 2.0 * theta * pu * (s.phi + s.phi_sinks))
            }
        }
    }

    fn run(mut self, max_passes: usize, record: bool) -> Result<OverlapOutcome> {
        let g = self.graph;
        let k = self.communities.len();
        let mut out_links = vec![0.0; k];
        let mut in_links = vec![0.0; k];
        let mut inflow = vec![0.0; k];
        let mut touched: Vec<usize> = Vec::new();
        let mut decisions = Vec::new();
        let mut pass = 0;
        loop {
            pass += 1;
            if pass > max_passes {
                return Err(Error::PassLimit(max_passes));
            }
            let mut added = 0usize;
            for u in 0..g.n() {
                touched.clear();
                for &w in g.out_neighbors(u) {
                    for &c in &self.memberships[w] {
                        if out_links[c] == 0.0 && in_links[c] == 0.0 {
                            touched.push(c);
                        }
                        out_links[c] += 1.0;
                    }
                }
                for &w in g.in_neighbors(u) {
                    let share = match self.rule {
                        GainRule::DirectedSd { phi, .. } => phi[w] / g.out_degree(w) as f64,
                        _ => 0.0,
                    };
                    for &c in &self.memberships[w] {
                        if out_links[c] == 0.0 && in_links[c] == 0.0 {
                            touched.push(c);
                        }
                        in_links[c] += 1.0;
                        inflow[c] += share;
                    }
                }
                touched.sort_unstable();
                for &c in &touched {
                    if self.memberships[u].contains(&c) {
                        continue;
                    }
                    let (lhs, rhs) = self.test(u, c, out_links[c], in_links[c], inflow[c]);
                    let accepted = lhs > rhs;
                    if record {
                        decisions.push(MembershipDecision { vertex: u, community: c, lhs, rhs, accepted, pass });
                    }
                    if accepted {
                        self.add(u, c);
                        added += 1;
                    }
                }
                for &c in &touched {
                    out_links[c] = 0.0;
                    in_links[c] = 0.0;
                    inflow[c] = 0.0;
                }
            }
            if added == 0 {
                break;
            }
        }
        let cover = Cover::new(g.n(), self.communities)?;
        Ok(OverlapOutcome { cover, decisions, passes: pass })
    }
}

fn check_partition(graph: &Graph, partition: &Partition) -> Result<()> {
    if partition.n() != graph.n() {
        return Err(Error::UniverseMismatch(partition.n(), graph.n()));
    }
    Ok(())
}

fn pass_cap(graph: &Graph, partition: &Partition, params: &OverlapParams) -> usize {
    params.max_passes.unwrap_or(graph.n() * partition.k() + 1)
}

/// Undirected θ-modularity expansion: `u` joins `C` when
/// `Σ_{w∈C} A_uw / d_u > θ Σ_{w∈C} d_w / 2m`.
pub fn paramet_modularity_overlap(graph: &Graph, partition: &Partition, params: &OverlapParams) -> Result<OverlapOutcome> {
    if graph.is_directed() {
        return Err(Error::RequiresUndirected(Algorithm::ParametModul.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Modularity)?;
    Engine::new(graph, partition, GainRule::Undirected, params.theta)
        .run(pass_cap(graph, partition, params), params.record_decisions)
}

/// Directed θ-modularity expansion: `u` joins `C` when
/// `Σ_{w∈C} (A_uw + A_wu) > θ Σ_{w∈C} (d_in(u) d_out(w) + d_in(w) d_out(u)) / m`.
pub fn di_paramet_d_modularity_overlap(
    graph: &Graph,
    partition: &Partition,
    params: &OverlapParams,
) -> Result<OverlapOutcome> {
    if !graph.is_directed() {
        return Err(Error::RequiresDirected(Algorithm::DiParametD.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Modularity)?;
    Engine::new(graph, partition, GainRule::DirectedD, params.theta)
        .run(pass_cap(graph, partition, params), params.record_decisions)
}

/// Stationary-distribution expansion: `u` joins `C` when
/// `Σ_{w∈C} (φ_u P_uw + φ_w P_wu) > 2θ Σ_{w∈C} φ_u φ_w`.
/// When `phi` was computed with teleportation, `P` is the teleporting chain.
pub fn di_paramet_sd_modularity_overlap(
    graph: &Graph,
    partition: &Partition,
    phi: &StationaryDistribution,
    params: &OverlapParams,
) -> Result<OverlapOutcome> {
    if !graph.is_directed() {
        return Err(Error::RequiresDirected(Algorithm::DiParametSd.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Modularity)?;
    if phi.phi.len() != graph.n() {
        return Err(Error::UniverseMismatch(phi.phi.len(), graph.n()));
    }
    if phi.teleport == 0.0 && !graph.is_strongly_connected() {
        return Err(Error::NotStronglyConnected(Algorithm::DiParametSd.name()));
    }
    let rule = GainRule::DirectedSd { phi: &phi.phi, teleport: phi.teleport };
    Engine::new(graph, partition, rule, params.theta).run(pass_cap(graph, partition, params), params.record_decisions)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean coordinate of each community.
pub fn centers(embedding: &Embedding, communities: &[Vec<usize>]) -> Vec<Vec<f64>> {
    communities
        .iter()
        .map(|c| {
            let mut center = vec![0.0; embedding.dim()];
            for &u in c {
                for (s, x) in center.iter_mut().zip(embedding.row(u)) {
                    *s += x;
                }
            }
            center.iter_mut().for_each(|s| *s /= c.len() as f64);
            center
        })
        .collect()
}

/// Single pass with centers frozen at the original members: `u` joins `C_j`
/// when `cos(Coord(u), Center_j) > θ`.
pub fn cosine_expand(embedding: &Embedding, partition: &Partition, theta: f64, record: bool) -> Result<OverlapOutcome> {
    let original = partition.communities();
    let centers = centers(embedding, &original);
    let n = partition.n();
    for u in 0..n {
        if embedding.row(u).iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroNorm(format!("vertex {u}")));
        }
    }
    let per_community = original
        .par_iter()
        .enumerate()
        .map(|(j, members)| {
            let mut grown = members.clone();
            let mut log = Vec::new();
            for u in (0..n).filter(|&u| partition.label(u) != j) {
                let cos = cosine(embedding.row(u), &centers[j])
                    .ok_or_else(|| Error::ZeroNorm(format!("center of community {j}")))?;
                let accepted = cos > theta;
                if record {
                    log.push(MembershipDecision { vertex: u, community: j, lhs: cos, rhs: theta, accepted, pass: 1 });
                }
                if accepted {
                    grown.push(u);
                }
            }
            Ok((grown, log))
        })
        .collect::<Result<Vec<_>>>()?;
    let (communities, logs): (Vec<_>, Vec<_>) = per_community.into_iter().unzip();
    Ok(OverlapOutcome { cover: Cover::new(n, communities)?, decisions: logs.concat(), passes: 1 })
}

/// Cosine expansion over walk-profile coordinates `D^{-1/2} P^t_{u•}`.
pub fn cosine_overlap(graph: &Graph, partition: &Partition, params: &OverlapParams) -> Result<OverlapOutcome> {
    if graph.is_directed() {
        return Err(Error::RequiresUndirected(Algorithm::Cosine.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Cosine)?;
    let embedding = walktrap_embedding(graph, params.t)?;
    cosine_expand(&embedding, partition, params.theta, params.record_decisions)
}

/// Cosine expansion over Diplacian coordinates; the dimension defaults to
/// the partition's community count.
pub fn di_cosine_overlap(graph: &Graph, partition: &Partition, params: &OverlapParams) -> Result<OverlapOutcome> {
    if !graph.is_directed() {
        return Err(Error::RequiresDirected(Algorithm::DiCosine.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Cosine)?;
    if !graph.is_strongly_connected() {
        return Err(Error::NotStronglyConnected(Algorithm::DiCosine.name()));
    }
    let k = params.k.unwrap_or(partition.k());
    let embedding = diplacian_embedding(graph, k)?;
    cosine_expand(&embedding, partition, params.theta, params.record_decisions)
}

/// Baseline rule: `v` joins `C_j` when the fraction of its neighbours in
/// the original `C_j` is at least θ. Single pass.
pub fn baseline_parameterized_overlap(
    graph: &Graph,
    partition: &Partition,
    params: &OverlapParams,
) -> Result<OverlapOutcome> {
    if graph.is_directed() {
        return Err(Error::RequiresUndirected(Algorithm::BaselineParamet.name()));
    }
    check_partition(graph, partition)?;
    params.validate(Family::Baseline)?;
    let k = partition.k();
    let mut communities = partition.communities();
    let mut decisions = Vec::new();
    let mut counts = vec![0usize; k];
    for v in 0..graph.n() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &u in graph.out_neighbors(v) {
            counts[partition.label(u)] += 1;
        }
        let d = graph.degree(v);
        for (j, members) in communities.iter_mut().enumerate() {
            if partition.label(v) == j {
                continue;
            }
            let fraction = if d == 0 { 0.0 } else { counts[j] as f64 / d as f64 };
            let accepted = fraction >= params.theta;
            if params.record_decisions {
                decisions.push(MembershipDecision { vertex: v, community: j, lhs: fraction, rhs: params.theta, accepted, pass: 1 });
            }
            if accepted {
                members.push(v);
            }
        }
    }
    Ok(OverlapOutcome { cover: Cover::new(graph.n(), communities)?, decisions, passes: 1 })
}

/// Runs one step-two rule on a given partition.
pub fn expand(graph: &Graph, partition: &Partition, algorithm: Algorithm, params: &OverlapParams) -> Result<OverlapOutcome> {
    match algorithm {
        Algorithm::ParametModul => paramet_modularity_overlap(graph, partition, params),
        Algorithm::DiParametD => di_paramet_d_modularity_overlap(graph, partition, params),
        Algorithm::DiParametSd => {
            if params.teleport.is_none() && !graph.is_strongly_connected() {
                return Err(Error::NotStronglyConnected(Algorithm::DiParametSd.name()));
            }
            let opts = StationaryOptions { teleport: params.teleport, ..Default::default() };
            let phi = stationary_with(graph, &opts)?;
            di_paramet_sd_modularity_overlap(graph, partition, &phi, params)
        }
        Algorithm::Cosine => cosine_overlap(graph, partition, params),
        Algorithm::DiCosine => di_cosine_overlap(graph, partition, params),
        Algorithm::BaselineParamet => baseline_parameterized_overlap(graph, partition, params),
    }
}

/// Checks that `algorithm` can run on `graph` before any work is done.
pub fn check_compatible(graph: &Graph, algorithm: Algorithm, params: &OverlapParams) -> Result<()> {
    let name = algorithm.name();
    if algorithm.directed() && !graph.is_directed() {
        return Err(Error::RequiresDirected(name));
    }
    if !algorithm.directed() && graph.is_directed() {
        return Err(Error::RequiresUndirected(name));
    }
    match algorithm {
        Algorithm::DiParametSd if params.teleport.is_none() && !graph.is_strongly_connected() => {
            Err(Error::NotStronglyConnected(name))
        }
        Algorithm::DiCosine if !graph.is_strongly_connected() => Err(Error::NotStronglyConnected(name)),
        Algorithm::Cosine if !graph.is_weakly_connected() => Err(Error::NotConnected(name)),
        _ => params.validate(algorithm.family()),
    }
}

/// Step one for `algorithm`. The spectral partitioner needs a cluster count:
/// `k`, or when absent the community count found by directed Louvain.
pub fn initial_partition(graph: &Graph, algorithm: Algorithm, k: Option<usize>, config: &ClusteringConfig) -> Result<Partition> {
    match algorithm.step_one() {
        StepOne::Louvain => Ok(louvain(graph, config)),
        StepOne::Spectral => {
            let k = match k {
                Some(k) => k,
                None => louvain(graph, config).k().max(2),
            };
            spectral_partition(graph, k.min(graph.n()), config)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub partition: Partition,
    pub outcome: OverlapOutcome,
}

/// Both steps: the family's disjoint clustering, then `algorithm`'s expansion.
pub fn detect(graph: &Graph, algorithm: Algorithm, params: &OverlapParams, config: &ClusteringConfig) -> Result<Detection> {
    check_compatible(graph, algorithm, params)?;
    let partition = initial_partition(graph, algorithm, params.k, config)?;
    let outcome = expand(graph, &partition, algorithm, params)?;
    Ok(Detection { partition, outcome })
}
