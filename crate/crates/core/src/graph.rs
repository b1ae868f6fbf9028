//! Immutable unweighted graphs stored as compressed out/in adjacency.
//!
//! Undirected graphs are kept as symmetric digraphs: every edge `{u, v}`
//! becomes the two arcs `u -> v` and `v -> u`, so the walk and modularity
//! code only ever deals with arcs. `m` still counts undirected edges.

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use crate::error::{Error, Result};

/// Mapping between dense vertex indices `0..n` and the ids used in input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    external: Vec<i64>,
    index: HashMap<i64, usize>,
}

impl IdMap {
    /// Builds a map from external ids; indices follow ascending id order.
    pub fn from_ids(mut ids: Vec<i64>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        IdMap { external: ids, index }
    }

    /// `0..n` or `1..=n`.
    pub fn contiguous(n: usize, one_indexed: bool) -> Self {
        let base = i64::from(one_indexed);
        Self::from_ids((0..n as i64).map(|i| i + base).collect())
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn external(&self, v: usize) -> i64 {
        self.external[v]
    }

    pub fn lookup(&self, id: i64) -> Option<usize> {
        self.index.get(&id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    m: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    ids: IdMap,
}

fn compress(n: usize, arcs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    // `arcs` must be sorted by (source, target)
    let mut offsets = vec![0usize; n + 1];
    for &(u, _) in arcs {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let targets = arcs.iter().map(|&(_, v)| v).collect();
    (offsets, targets)
}

impl Graph {
    /// Builds a graph on vertices `0..n` from a list of arcs (or edges, when
    /// undirected). Duplicates are collapsed; self-loops and out-of-range
    /// endpoints are rejected.
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_ids(IdMap::contiguous(n, false), directed, edges)
    }

    pub fn with_ids<I>(ids: IdMap, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = ids.len();
        let mut arcs = Vec::new();
        for (u, v) in edges {
            if u >= n {
                return Err(Error::UnknownVertex(u));
            }
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if u == v {
                return Err(Error::SelfLoop { line: 0, vertex: ids.external(u) });
            }
            arcs.push((u, v));
            if !directed {
                arcs.push((v, u));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        let m = if directed { arcs.len() } else { arcs.len() / 2 };
        let (out_offsets, out_targets) = compress(n, &arcs);
        let mut reversed: Vec<(usize, usize)> = arcs.iter().map(|&(u, v)| (v, u)).collect();
        reversed.sort_unstable();
        let (in_offsets, in_sources) = compress(n, &reversed);
        Ok(Graph { directed, m, out_offsets, out_targets, in_offsets, in_sources, ids })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Undirected edges, or arcs for a digraph.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of stored arcs: `2m` undirected, `m` directed. This is the
    /// degree total `d` used by the modularity normalisations.
    pub fn arc_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    pub fn in_neighbors(&self, u: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[u]..self.in_offsets[u + 1]]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_offsets[u + 1] - self.in_offsets[u]
    }

    /// Out-degree; equal to the ordinary degree for undirected graphs.
    pub fn degree(&self, u: usize) -> usize {
        self.out_degree(u)
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// Adjacency entry `A[u][v]` as 0/1 (arc `u -> v`).
    pub fn adjacency(&self, u: usize, v: usize) -> f64 {
        if self.has_arc(u, v) {
            1.0
        } else {
            0.0
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Edges once each for undirected graphs (`u < v`), arcs otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let directed = self.directed;
        self.arcs().filter(move |&(u, v)| directed || u < v)
    }

    /// Same vertex set and arcs, viewed as a digraph.
    pub fn to_directed(&self) -> Graph {
        Graph { directed: true, m: self.arc_count(), ..self.clone() }
    }

    fn reach(&self, start: usize, forward: bool) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            let next = if forward { self.out_neighbors(u) } else { self.in_neighbors(u) };
            for &v in next {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count
    }

    /// True iff every vertex reaches every other along arcs. Vertex 0 must
    /// reach everything forward and backward.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        n == 0 || (self.reach(0, true) == n && self.reach(0, false) == n)
    }

    /// Connectivity ignoring arc direction.
    pub fn is_weakly_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.out_neighbors(u).iter().chain(self.in_neighbors(u)) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

pub fn strongly_connected(graph: &Graph) -> bool {
    graph.is_strongly_connected()
}

/// Splits a data line into integer tokens; `None` for blank and comment lines.
pub(crate) fn int_tokens(line: &str, lineno: usize) -> Result<Option<Vec<i64>>> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("expected an integer vertex id, found {tok:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Reads a whitespace-separated edge list. Lines starting with `#` are
/// comments. The first token of each line is the arc source for directed
/// graphs. Vertex ids are re-indexed densely in ascending order; ids must be
/// `>= 0`, or `>= 1` when `one_indexed`.
pub fn load_edge_list<R: BufRead>(source: R, directed: bool, one_indexed: bool) -> Result<Graph> {
    let base = i64::from(one_indexed);
    let mut raw = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let Some(tokens) = int_tokens(&line, lineno)? else {
            continue;
        };
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two vertex ids, found {} tokens", tokens.len()),
            });
        }
        let (u, v) = (tokens[0], tokens[1]);
        for id in [u, v] {
            if id < base {
                return Err(Error::VertexOutOfRange { line: lineno, id });
            }
        }
        if u == v {
            return Err(Error::SelfLoop { line: lineno, vertex: u });
        }
        raw.push((u, v));
    }
    let ids = IdMap::from_ids(raw.iter().flat_map(|&(u, v)| [u, v]).collect());
    let edges: Vec<(usize, usize)> = raw
        .iter()
        .map(|&(u, v)| (ids.lookup(u).unwrap(), ids.lookup(v).unwrap()))
        .collect();
    Graph::with_ids(ids, directed, edges)
}
