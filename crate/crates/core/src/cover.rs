//! Disjoint partitions, overlapping covers, and the `community.dat` format.
//!
//! The cover format has one line per vertex: `vertex community [community ...]`.
//! Vertices in no community are simply absent.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{int_tokens, IdMap};

/// Assignment of every vertex to exactly one of `k` nonempty communities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Relabels arbitrary ids to `0..k` in order of first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &r in raw {
            let next = map.len();
            labels.push(*map.entry(r).or_insert(next));
        }
        Partition { k: map.len(), labels }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { labels: (0..n).collect(), k: n }
    }

    pub fn whole(n: usize) -> Self {
        Partition { labels: vec![0; n], k: usize::from(n > 0) }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (u, &c) in self.labels.iter().enumerate() {
            out[c].push(u);
        }
        out
    }

    pub fn to_cover(&self) -> Cover {
        Cover { communities: self.communities(), n: self.n() }
    }
}

/// A family of nonempty, possibly overlapping vertex sets over `0..n`.
/// Each community is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    communities: Vec<Vec<usize>>,
    n: usize,
}

impl Cover {
    pub fn new(n: usize, communities: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(communities.len());
        for (j, mut c) in communities.into_iter().enumerate() {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                return Err(Error::EmptyCommunity(j));
            }
            if let Some(&v) = c.iter().find(|&&v| v >= n) {
                return Err(Error::UnknownVertex(v));
            }
            out.push(c);
        }
        Ok(Cover { communities: out, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.communities.len()
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn community(&self, j: usize) -> &[usize] {
        &self.communities[j]
    }

    pub fn contains(&self, j: usize, u: usize) -> bool {
        self.communities[j].binary_search(&u).is_ok()
    }

    /// Community indices containing each vertex, ascending.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (j, c) in self.communities.iter().enumerate() {
            for &u in c {
                out[u].push(j);
            }
        }
        out
    }

    /// Vertices in two or more communities.
    pub fn overlapping_vertices(&self) -> usize {
        self.memberships().iter().filter(|m| m.len() > 1).count()
    }

    pub fn covers_all(&self) -> bool {
        self.memberships().iter().all(|m| !m.is_empty())
    }

    /// Communities sorted lexicographically; equal for covers that differ
    /// only in community order.
    pub fn canonical(&self) -> Cover {
        let mut communities = self.communities.clone();
        communities.sort();
        Cover { communities, n: self.n }
    }

    pub fn same_as(&self, other: &Cover) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Reads a cover whose vertex tokens are resolved through `ids`.
/// Community ids are arbitrary integers; communities are ordered by id.
pub fn read_cover<R: BufRead>(source: R, ids: &IdMap) -> Result<Cover> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let Some(tokens) = int_tokens(&line, lineno)? else {
            continue;
        };
        if tokens.len() < 2 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected a vertex id followed by at least one community id".into(),
            });
        }
        let v = ids
            .lookup(tokens[0])
            .ok_or(Error::VertexOutOfRange { line: lineno, id: tokens[0] })?;
        for &c in &tokens[1..] {
            groups.entry(c).or_default().push(v);
        }
    }
    Cover::new(ids.len(), groups.into_values().collect())
}

/// Reads a standalone cover over `0..n`, where `n` is one past the largest
/// vertex id seen (after removing the index base).
pub fn load_cover<R: BufRead>(source: R, one_indexed: bool) -> Result<Cover> {
    let text = std::io::read_to_string(source)?;
    let base = i64::from(one_indexed);
    let mut max_id = base - 1;
    for (i, line) in text.lines().enumerate() {
        if let Some(tokens) = int_tokens(line, i + 1)? {
            if tokens[0] < base {
                return Err(Error::VertexOutOfRange { line: i + 1, id: tokens[0] });
            }
            max_id = max_id.max(tokens[0]);
        }
    }
    let n = (max_id - base + 1) as usize;
    read_cover(text.as_bytes(), &IdMap::contiguous(n, one_indexed))
}

/// Writes the cover with vertex ids from `ids` and community ids
/// `1..=k` (or `0..k` when `one_indexed` is false).
pub fn write_cover<W: Write>(cover: &Cover, ids: &IdMap, one_indexed: bool, mut out: W) -> Result<()> {
    let base = usize::from(one_indexed);
    for (u, member) in cover.memberships().iter().enumerate() {
        if member.is_empty() {
            continue;
        }
        write!(out, "{}", ids.external(u))?;
        for &j in member {
            write!(out, " {}", j + base)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn cover_to_string(cover: &Cover, ids: &IdMap, one_indexed: bool) -> String {
    let mut buf = Vec::new();
    write_cover(cover, ids, one_indexed, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("cover output is ASCII")
}
