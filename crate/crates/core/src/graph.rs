//! Directed multigraphs `(V, E, i, t)`.
//!
//! Vertices and edges are dense 0-based indices internally. Files and CSV
//! output number vertices from 1; the conversion happens at the I/O boundary.

use std::collections::VecDeque;

use serde::Serialize;

use crate::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Default cap on [`Digraph::admissible_words`] output.
pub const DEFAULT_WORD_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: EdgeId,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    incoming: Vec<Vec<EdgeId>>,
}

/// Result of a structural or statistical check. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub message: String,
    /// How many times this kind of violation was observed.
    pub count: usize,
    /// A concrete witness (point, edge, vertex) rendered as text.
    pub witness: Option<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, kind: &str, message: impl Into<String>, witness: Option<String>) {
        self.violations.push(Violation {
            kind: kind.to_string(),
            message: message.into(),
            count: 1,
            witness,
        });
    }

    /// Records one more occurrence of `kind`, keeping the first witness.
    pub fn tally(&mut self, kind: &str, message: impl Into<String>, witness: impl FnOnce() -> String) {
        if let Some(v) = self.violations.iter_mut().find(|v| v.kind == kind) {
            v.count += 1;
        } else {
            self.push(kind, message, Some(witness()));
        }
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.count)
            .sum()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        for v in other.violations {
            if let Some(mine) = self.violations.iter_mut().find(|m| m.kind == v.kind) {
                mine.count += v.count;
            } else {
                self.violations.push(v);
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Digraph {
    /// Builds a digraph from `(source, target)` pairs; edge ids follow the
    /// slice order. Endpoints outside `0..vertex_count` are kept and reported
    /// by [`Digraph::validate`].
    pub fn new(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Self {
        let edges: Vec<Edge> = edges
            .iter()
            .enumerate()
            .map(|(id, &(source, target))| Edge { id, source, target })
            .collect();
        Self::from_edges(vertex_count, edges)
    }

    /// Builds a digraph from explicit edges; ids are checked by `validate`.
    pub fn from_edges(vertex_count: usize, edges: Vec<Edge>) -> Self {
        let mut out = vec![Vec::new(); vertex_count];
        let mut incoming = vec![Vec::new(); vertex_count];
        for (k, e) in edges.iter().enumerate() {
            if e.source < vertex_count {
                out[e.source].push(k);
            }
            if e.target < vertex_count {
                incoming[e.target].push(k);
            }
        }
        Digraph {
            vertex_count,
            edges,
            out,
            incoming,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e].source
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[e].target
    }

    /// Outgoing edges of `v` in increasing id order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incoming[v]
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.vertex_count == 0 {
            report.push("empty", "the digraph has no vertices", None);
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.id != k {
                report.push(
                    "edge-ids",
                    format!("edge ids must be dense 0..{}, found {} at position {k}", self.edges.len(), e.id),
                    Some(format!("edge {}", e.id)),
                );
            }
            for (end, v) in [("source", e.source), ("target", e.target)] {
                if v >= self.vertex_count {
                    report.push(
                        "endpoint",
                        format!("{end} of edge {} is vertex {} outside 1..{}", e.id, v + 1, self.vertex_count),
                        Some(format!("edge {}", e.id)),
                    );
                }
            }
        }
        for v in 0..self.vertex_count {
            if self.out[v].is_empty() {
                report.push(
                    "surjectivity",
                    format!("vertex {} has no outgoing edge; the source map is not surjective", v + 1),
                    Some(format!("vertex {}", v + 1)),
                );
            }
        }
        report
    }

    fn reach(&self, from: VertexId, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            let adj = if forward { &self.out[v] } else { &self.incoming[v] };
            for &e in adj {
                let w = if forward { self.edges[e].target } else { self.edges[e].source };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// True iff the vertex set is a single strongly connected component.
    pub fn is_irreducible(&self) -> bool {
        if self.vertex_count == 0 {
            return false;
        }
        self.reach(0, true).into_iter().all(|b| b) && self.reach(0, false).into_iter().all(|b| b)
    }

    /// Period of an irreducible digraph: gcd over edges `u -> v` of
    /// `level(u) + 1 - level(v)` with BFS levels from vertex 0.
    pub fn period(&self) -> Result<usize> {
        if !self.is_irreducible() {
            return Err(Error::Graph("period is undefined for a reducible digraph".into()));
        }
        let mut level = vec![usize::MAX; self.vertex_count];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.out[v] {
                let w = self.edges[e].target;
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(self.edges.iter().fold(0, |g, e| {
            let diff = (level[e.source] as i64 + 1 - level[e.target] as i64).unsigned_abs() as usize;
            gcd(g, diff)
        }))
    }

    pub fn is_aperiodic(&self) -> Result<bool> {
        Ok(self.period()? == 1)
    }

    /// Checks `t(e_k) = i(e_{k+1})` along the word.
    pub fn check_path(&self, word: &[EdgeId]) -> Result<()> {
        for (k, &e) in word.iter().enumerate() {
            if e >= self.edges.len() {
                return Err(Error::InadmissibleWord { position: k });
            }
            if k > 0 && self.target(word[k - 1]) != self.source(e) {
                return Err(Error::InadmissibleWord { position: k });
            }
        }
        Ok(())
    }

    pub fn is_path(&self, word: &[EdgeId]) -> bool {
        self.check_path(word).is_ok()
    }

    /// All paths of `length` edges leaving `start`, in lexicographic edge-id
    /// order. Fails once more than `cap` words would be produced.
    pub fn admissible_words(&self, start: VertexId, length: usize, cap: usize) -> Result<Vec<Vec<EdgeId>>> {
        if length == 0 {
            return Err(Error::InvalidParameter("word length must be at least 1".into()));
        }
        if start >= self.vertex_count {
            return Err(Error::InvalidParameter(format!("vertex {} does not exist", start + 1)));
        }
        let mut words: Vec<Vec<EdgeId>> = vec![Vec::new()];
        for _ in 0..length {
            let mut next = Vec::new();
            for w in &words {
                let v = w.last().map_or(start, |&e| self.target(e));
                for &e in &self.out[v] {
                    if next.len() >= cap {
                        return Err(Error::ResourceLimit { cap });
                    }
                    let mut ext = w.clone();
                    ext.push(e);
                    next.push(ext);
                }
            }
            words = next;
        }
        Ok(words)
    }

    /// Paths of every length `1..=max_len` from every vertex.
    pub fn all_words_up_to(&self, max_len: usize, cap: usize) -> Result<Vec<Vec<EdgeId>>> {
        let mut all = Vec::new();
        for len in 1..=max_len {
            for v in 0..self.vertex_count {
                all.extend(self.admissible_words(v, len, cap.saturating_sub(all.len()))?);
            }
        }
        Ok(all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fc3() -> Digraph {
        // P = [[.5,.5,0],[0,.5,.5],[.5,0,.5]]
        Digraph::new(3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)])
    }

    #[test]
    fn validation_examples() {
        assert!(Digraph::new(1, &[(0, 0)]).validate().is_valid());
        let bad = Digraph::new(2, &[(0, 1)]).validate();
        assert_eq!(bad.count("surjectivity"), 1);
        assert!(bad.violations[0].message.contains("vertex 2"));
        assert!(Digraph::new(3, &[(0, 1), (1, 2), (2, 0), (0, 0)]).validate().is_valid());
        assert_eq!(Digraph::new(1, &[(0, 3)]).validate().count("endpoint"), 1);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(Digraph::new(1, &[(0, 0)]).is_irreducible());
        assert!(!Digraph::new(2, &[(0, 1), (1, 1)]).is_irreducible());
        assert!(Digraph::new(2, &[(0, 1), (1, 0)]).is_irreducible());
    }

    #[test]
    fn aperiodicity_examples() {
        assert!(Digraph::new(1, &[(0, 0)]).is_aperiodic().unwrap());
        assert!(!Digraph::new(2, &[(0, 1), (1, 0)]).is_aperiodic().unwrap());
        assert!(Digraph::new(2, &[(0, 1), (1, 0), (0, 0)]).is_aperiodic().unwrap());
        assert_eq!(Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).period().unwrap(), 3);
        assert!(Digraph::new(2, &[(0, 1), (1, 1)]).is_aperiodic().is_err());
    }

    #[test]
    fn word_enumeration_examples() {
        let full = Digraph::new(1, &[(0, 0), (0, 0)]);
        assert_eq!(full.admissible_words(0, 2, DEFAULT_WORD_CAP).unwrap().len(), 4);
        let cycle = Digraph::new(2, &[(0, 1), (1, 0)]);
        assert_eq!(cycle.admissible_words(0, 3, DEFAULT_WORD_CAP).unwrap(), vec![vec![0, 1, 0]]);
        // row 1 -> {1, 2}; vertex 1 -> {1, 2}, vertex 2 -> {2, 3}
        let words = fc3().admissible_words(0, 2, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 2], vec![1, 3]]);
        assert!(matches!(
            full.admissible_words(0, 10, 100),
            Err(Error::ResourceLimit { cap: 100 })
        ));
    }

    #[test]
    fn path_check() {
        let g = fc3();
        assert!(g.is_path(&[0, 1, 3, 4]));
        assert_eq!(g.check_path(&[0, 2]), Err(Error::InadmissibleWord { position: 1 }));
        assert!(!g.is_path(&[9]));
    }

    fn brute_irreducible(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            r[i][i] = true;
        }
        for &(a, b) in edges {
            r[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r.iter().all(|row| row.iter().all(|&b| b))
    }

    #[test]
    fn irreducibility_matches_reachability_exhaustively() {
        // every simple digraph with <= 4 vertices and <= 8 edges; parallel
        // edges do not change reachability
        for n in 1..=4usize {
            let universe: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
            for mask in 0u32..(1 << universe.len()) {
                if mask.count_ones() > 8 {
                    continue;
                }
                let edges: Vec<_> = universe
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, e)| *e)
                    .collect();
                let g = Digraph::new(n, &edges);
                assert_eq!(g.is_irreducible(), brute_irreducible(n, &edges), "{edges:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn irreducibility_on_four_vertices(edges in proptest::collection::vec((0usize..4, 0usize..4), 0..=8)) {
            let g = Digraph::new(4, &edges);
            prop_assert_eq!(g.is_irreducible(), brute_irreducible(4, &edges));
        }

        #[test]
        fn words_extend_and_restrict(len in 1usize..5, start in 0usize..3) {
            let g = fc3();
            let short = g.admissible_words(start, len, DEFAULT_WORD_CAP).unwrap();
            let long = g.admissible_words(start, len + 1, DEFAULT_WORD_CAP).unwrap();
            for w in &long {
                prop_assert!(short.contains(&w[..len].to_vec()));
            }
            for w in &short {
                prop_assert!(long.iter().any(|l| l[..len] == w[..]));
            }
        }
    }
}
