//! Benchmark inputs and parameter sweeps: a planted-overlap random graph
//! generator, LFR `network.dat`/`community.dat` ingestion, and the θ-grid
//! experiment harness.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{read_cover, Cover, Partition};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::metrics::{onmi, overlap_modularity_avg, theta_modularity, ThetaVariant};
use crate::overlap::{
    check_compatible, cosine_expand, di_paramet_sd_modularity_overlap, expand, initial_partition, Algorithm,
    OverlapOutcome, OverlapParams, StepOne,
};
use crate::partition::ClusteringConfig;
use crate::walks::{
    diplacian_embedding, stationary_with, walktrap_embedding, Embedding, StationaryDistribution, StationaryOptions,
};

pub const GENERATION_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub n: usize,
    pub k_communities: usize,
    /// Number of overlapping vertices (the last `on` vertices).
    pub on: usize,
    /// Memberships per overlapping vertex.
    pub om: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub directed: bool,
    pub seed: u64,
}

impl PlantedParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k_communities == 0 || self.n < self.k_communities {
            return bad(format!("need 1 <= k_communities <= n, got k = {}, n = {}", self.k_communities, self.n));
        }
        if self.on > self.n {
            return bad(format!("on = {} exceeds n = {}", self.on, self.n));
        }
        if self.on > 0 && !(2 <= self.om && self.om <= self.k_communities) {
            return bad(format!("om = {} must satisfy 2 <= om <= k = {}", self.om, self.k_communities));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad(format!("need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}", self.p_in, self.p_out));
        }
        Ok(())
    }
}

/// Membership bitsets, one row of `words` u64s per vertex.
struct Memberships {
    words: usize,
    bits: Vec<u64>,
}

impl Memberships {
    fn new(n: usize, k: usize) -> Self {
        let words = k.div_ceil(64);
        Memberships { words, bits: vec![0; n * words] }
    }

    fn set(&mut self, u: usize, c: usize) {
        self.bits[u * self.words + c / 64] |= 1 << (c % 64);
    }

    fn share(&self, u: usize, v: usize) -> bool {
        let (a, b) = (&self.bits[u * self.words..][..self.words], &self.bits[v * self.words..][..self.words]);
        a.iter().zip(b).any(|(x, y)| x & y != 0)
    }
}

/// Planted overlapping communities. The first `n - on` vertices get one
/// community each, round-robin; the last `on` get `om` distinct communities
/// drawn from the seeded stream. Each unordered pair (ordered, if directed)
/// becomes an edge with probability `p_in` when the endpoints share a
/// community, `p_out` otherwise. Graphs that are disconnected (not strongly
/// connected, if directed) are redrawn, up to [`GENERATION_RETRIES`] times,
/// unless `p_out = 0` and the planted communities are themselves split into
/// groups sharing no vertex, in which case no draw could be connected.
pub fn planted_overlap_graph(params: &PlantedParams) -> Result<(Graph, Cover)> {
    params.validate()?;
    let PlantedParams { n, k_communities: k, on, om, p_in, p_out, directed, seed } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = vec![Vec::new(); k];
    let mut member = Memberships::new(n, k);
    for u in 0..n - on {
        groups[u % k].push(u);
        member.set(u, u % k);
    }
    for u in n - on..n {
        for c in sample(&mut rng, k, om).into_vec() {
            groups[c].push(u);
            member.set(u, c);
        }
    }
    let cover = Cover::new(n, groups)?;
    let enforce = p_out > 0.0 || communities_linked(&cover);

    for _ in 0..GENERATION_RETRIES {
        let mut edges = Vec::new();
        for u in 0..n {
            let start = if directed { 0 } else { u + 1 };
            for v in start..n {
                if u == v {
                    continue;
                }
                let p = if member.share(u, v) { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let graph = Graph::from_edges(n, directed, edges)?;
        let ok = !enforce || if directed { graph.is_strongly_connected() } else { graph.is_weakly_connected() };
        if ok {
            return Ok((graph, cover));
        }
    }
    Err(Error::Generation(format!(
        "no {} graph in {GENERATION_RETRIES} attempts; increase p_in or p_out",
        if directed { "strongly connected" } else { "connected" }
    )))
}

/// Whether the community overlap graph is connected.
fn communities_linked(cover: &Cover) -> bool {
    let k = cover.k();
    let memberships = cover.memberships();
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(j) = stack.pop() {
        for &u in cover.community(j) {
            for &i in &memberships[u] {
                if !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Writes `network.dat`-style output: tab-separated endpoint pairs over the
/// dense vertex indices plus one, each undirected edge listed both ways.
pub fn write_lfr_network<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    for (u, v) in graph.arcs() {
        writeln!(out, "{}\t{}", u + 1, v + 1)?;
    }
    Ok(())
}

/// Writes `community.dat`-style output: `vertex<TAB>c1 c2 ...`, 1-indexed.
pub fn write_lfr_communities<W: Write>(cover: &Cover, mut out: W) -> Result<()> {
    for (u, member) in cover.memberships().iter().enumerate() {
        if member.is_empty() {
            continue;
        }
        let labels: Vec<String> = member.iter().map(|j| (j + 1).to_string()).collect();
        writeln!(out, "{}\t{}", u + 1, labels.join(" "))?;
    }
    Ok(())
}

/// Loads an LFR `network.dat` / `community.dat` pair (1-indexed). Every
/// vertex of the network must appear in the community file and vice versa.
/// The first token of a network line is the arc source.
pub fn load_lfr<N: BufRead, C: BufRead>(network: N, communities: C, directed: bool) -> Result<(Graph, Cover)> {
    let graph = load_edge_list(network, directed, true)?;
    let text = std::io::read_to_string(communities)?;
    let cover = read_cover(text.as_bytes(), graph.ids()).map_err(|e| match e {
        Error::VertexOutOfRange { line, id } => Error::Parse {
            line,
            message: format!("community file lists vertex {id}, which is absent from the network"),
        },
        other => other,
    })?;
    if let Some(u) = cover.memberships().iter().position(Vec::is_empty) {
        return Err(Error::InvalidParameter(format!(
            "network vertex {} has no community in the community file",
            graph.ids().external(u)
        )));
    }
    Ok((graph, cover))
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub theta: f64,
    /// Average-belonging overlapping modularity (undirected graphs) or the
    /// directed modularity of the cover at θ = 1 (digraphs).
    pub modularity: f64,
    pub onmi: Option<f64>,
    pub communities: usize,
    pub overlapping: usize,
    pub runtime_ms: f64,
    pub best_modularity: bool,
    pub best_onmi: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// Per-algorithm series for external charting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub algorithm: Algorithm,
    pub theta: Vec<f64>,
    pub modularity: Vec<f64>,
    pub onmi: Option<Vec<f64>>,
}

impl SweepReport {
    pub fn rows_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn best_modularity(&self, algorithm: Algorithm) -> Option<&SweepRow> {
        self.rows_for(algorithm).find(|r| r.best_modularity)
    }

    pub fn best_onmi(&self, algorithm: Algorithm) -> Option<&SweepRow> {
        self.rows_for(algorithm).find(|r| r.best_onmi)
    }

    /// Rows as CSV. Runtimes are wall-clock and vary between runs, so the
    /// column is only written when `timings` is set.
    pub fn write_csv<W: Write>(&self, out: W, timings: bool) -> Result<()> {
        let with_onmi = self.rows.iter().any(|r| r.onmi.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["algorithm", "theta", "modularity"];
        if with_onmi {
            header.push("onmi");
        }
        header.extend(["communities", "overlapping"]);
        if timings {
            header.push("runtime_ms");
        }
        header.extend(["best_modularity", "best_onmi"]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.algorithm.to_string(), r.theta.to_string(), r.modularity.to_string()];
            if with_onmi {
                rec.push(r.onmi.map(|x| x.to_string()).unwrap_or_default());
            }
            rec.extend([r.communities.to_string(), r.overlapping.to_string()]);
            if timings {
                rec.push(format!("{:.3}", r.runtime_ms));
            }
            rec.extend([r.best_modularity.to_string(), r.best_onmi.to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn plot_data(&self) -> Vec<PlotSeries> {
        let mut by_algorithm: BTreeMap<Algorithm, PlotSeries> = BTreeMap::new();
        for r in &self.rows {
            let s = by_algorithm.entry(r.algorithm).or_insert_with(|| PlotSeries {
                algorithm: r.algorithm,
                theta: Vec::new(),
                modularity: Vec::new(),
                onmi: r.onmi.map(|_| Vec::new()),
            });
            s.theta.push(r.theta);
            s.modularity.push(r.modularity);
            if let (Some(series), Some(v)) = (s.onmi.as_mut(), r.onmi) {
                series.push(v);
            }
        }
        by_algorithm.into_values().collect()
    }
}

/// Scores a cover the way sweep rows do.
pub fn cover_modularity(graph: &Graph, cover: &Cover) -> Result<f64> {
    if graph.is_directed() {
        theta_modularity(graph, cover, 1.0, ThetaVariant::DirectedD)
    } else {
        overlap_modularity_avg(graph, cover)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithm: Algorithm,
    /// θ values; empty means the algorithm's default grid.
    pub grid: Vec<f64>,
    /// Base parameters (t, k, teleport); θ is overwritten per grid point.
    pub params: OverlapParams,
}

impl SweepSpec {
    pub fn default_for(algorithm: Algorithm) -> Self {
        SweepSpec { algorithm, grid: algorithm.default_grid(), params: OverlapParams::default() }
    }
}

/// Runs step one once per step-one kind, then every grid point of every
/// algorithm. Rows come back in input order; within an algorithm the first
/// row attaining the maximum is marked best.
pub fn sweep(graph: &Graph, ground_truth: Option<&Cover>, specs: &[SweepSpec], seed: u64) -> Result<SweepReport> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no algorithms to sweep".into()));
    }
    if let Some(truth) = ground_truth {
        if truth.n() != graph.n() {
            return Err(Error::UniverseMismatch(truth.n(), graph.n()));
        }
    }
    for spec in specs {
        if spec.grid.is_empty() {
            return Err(Error::InvalidParameter(format!("empty θ grid for {}", spec.algorithm)));
        }
        for &theta in &spec.grid {
            check_compatible(graph, spec.algorithm, &OverlapParams { theta, ..spec.params })?;
        }
    }
    let config = ClusteringConfig::with_seed(seed);
    let mut step_one: BTreeMap<(StepOne, Option<usize>), Partition> = BTreeMap::new();
    for spec in specs {
        let k = match spec.algorithm.step_one() {
            StepOne::Spectral => spec.params.k.or(ground_truth.map(Cover::k)),
            StepOne::Louvain => None,
        };
        let key = (spec.algorithm.step_one(), k);
        if !step_one.contains_key(&key) {
            step_one.insert(key, initial_partition(graph, spec.algorithm, k, &config)?);
        }
    }

    let mut rows = Vec::new();
    for spec in specs {
        let k = match spec.algorithm.step_one() {
            StepOne::Spectral => spec.params.k.or(ground_truth.map(Cover::k)),
            StepOne::Louvain => None,
        };
        let partition = &step_one[&(spec.algorithm.step_one(), k)];
        let shared = Shared::prepare(graph, partition, spec)?;
        let mut block = spec
            .grid
            .par_iter()
            .map(|&theta| {
                let params = OverlapParams { theta, record_decisions: false, ..spec.params };
                let start = Instant::now();
                let outcome = shared.expand(graph, partition, spec.algorithm, &params)?;
                let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                let cover = outcome.cover;
                Ok(SweepRow {
                    algorithm: spec.algorithm,
                    theta,
                    modularity: cover_modularity(graph, &cover)?,
                    onmi: ground_truth.map(|t| onmi(&cover, t)).transpose()?,
                    communities: cover.k(),
                    overlapping: cover.overlapping_vertices(),
                    runtime_ms,
                    best_modularity: false,
                    best_onmi: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        mark_best(&mut block, |r| Some(r.modularity), |r| &mut r.best_modularity);
        mark_best(&mut block, |r| r.onmi, |r| &mut r.best_onmi);
        rows.extend(block);
    }
    Ok(SweepReport { rows })
}

/// Inputs that do not depend on θ, computed once per algorithm.
enum Shared {
    Nothing,
    Stationary(StationaryDistribution),
    Coordinates(Embedding),
}

impl Shared {
    fn prepare(graph: &Graph, partition: &Partition, spec: &SweepSpec) -> Result<Self> {
        Ok(match spec.algorithm {
            Algorithm::DiParametSd => {
                let opts = StationaryOptions { teleport: spec.params.teleport, ..Default::default() };
                Shared::Stationary(stationary_with(graph, &opts)?)
            }
            Algorithm::Cosine => Shared::Coordinates(walktrap_embedding(graph, spec.params.t)?),
            Algorithm::DiCosine => {
                Shared::Coordinates(diplacian_embedding(graph, spec.params.k.unwrap_or(partition.k()))?)
            }
            _ => Shared::Nothing,
        })
    }

    fn expand(&self, graph: &Graph, partition: &Partition, algorithm: Algorithm, params: &OverlapParams) -> Result<OverlapOutcome> {
        match self {
            Shared::Nothing => expand(graph, partition, algorithm, params),
            Shared::Stationary(phi) => di_paramet_sd_modularity_overlap(graph, partition, phi, params),
            Shared::Coordinates(embedding) => cosine_expand(embedding, partition, params.theta, false),
        }
    }
}

fn mark_best(rows: &mut [SweepRow], score: impl Fn(&SweepRow) -> Option<f64>, flag: impl Fn(&mut SweepRow) -> &mut bool) {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in rows.iter().enumerate() {
        if let Some(s) = score(r) {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    if let Some((i, _)) = best {
        *flag(&mut rows[i]) = true;
    }
}
