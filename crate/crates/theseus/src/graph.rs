//! Colored, complex-weighted graphs and their perfect matchings.
//!
//! Vertices `0..n_real` are photon paths; vertices `n_real..n_real + n_virtual`
//! are virtual vertices standing for incoming single photons. An edge carries a
//! mode color at each endpoint and a complex amplitude. Edges are stored with
//! `u < v` and kept sorted by `(u, v, cu, cv)`, so an edge index is stable for a
//! given edge set.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Real,
    Virtual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub index: usize,
    pub kind: VertexKind,
}

/// Identity of an edge independent of its weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub u: usize,
    pub v: usize,
    pub cu: usize,
    pub cv: usize,
}

impl EdgeKey {
    /// Builds the canonical key, swapping endpoints (and their colors) so that `u < v`.
    pub fn new(u: usize, v: usize, cu: usize, cv: usize) -> Result<Self> {
        if u == v {
            return Err(Error::invalid(format!("loop edge at vertex {u}")));
        }
        Ok(if u < v {
            EdgeKey { u, v, cu, cv }
        } else {
            EdgeKey {
                u: v,
                v: u,
                cu: cv,
                cv: cu,
            }
        })
    }

    pub fn touches(&self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }

    /// Color of the endpoint at `vertex`, if the edge touches it.
    pub fn color_at(&self, vertex: usize) -> Option<usize> {
        if self.u == vertex {
            Some(self.cu)
        } else if self.v == vertex {
            Some(self.cv)
        } else {
            None
        }
    }

    pub fn other(&self, vertex: usize) -> Option<usize> {
        if self.u == vertex {
            Some(self.v)
        } else if self.v == vertex {
            Some(self.u)
        } else {
            None
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.u, self.v, self.cu, self.cv)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cu: usize,
    pub cv: usize,
    pub weight: Complex64,
}

impl Edge {
    pub fn new(u: usize, v: usize, cu: usize, cv: usize, weight: Complex64) -> Result<Self> {
        let key = EdgeKey::new(u, v, cu, cv)?;
        Ok(Edge::from_key(key, weight))
    }

    pub fn from_key(key: EdgeKey, weight: Complex64) -> Self {
        Edge {
            u: key.u,
            v: key.v,
            cu: key.cu,
            cv: key.cv,
            weight,
        }
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            u: self.u,
            v: self.v,
            cu: self.cu,
            cv: self.cv,
        }
    }
}

/// A set of edge indices covering every vertex of some vertex set exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoredGraph {
    n_real: usize,
    n_virtual: usize,
    d_modes: usize,
    edges: Vec<Edge>,
}

impl ColoredGraph {
    /// An edgeless graph on `n_real` path vertices and `n_virtual` input vertices.
    pub fn empty(n_real: usize, n_virtual: usize, d_modes: usize) -> Result<Self> {
        if d_modes == 0 {
            return Err(Error::invalid("mode count must be at least 1"));
        }
        Ok(ColoredGraph {
            n_real,
            n_virtual,
            d_modes,
            edges: Vec::new(),
        })
    }

    /// Builds a graph from an edge list, validating and canonicalizing every edge.
    pub fn from_edges(
        n_real: usize,
        n_virtual: usize,
        d_modes: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut g = ColoredGraph::empty(n_real, n_virtual, d_modes)?;
        for e in edges {
            g.insert(e)?;
        }
        Ok(g)
    }

    /// The complete graph on `n` real vertices with all `d²` color pairs per vertex pair.
    /// Every weight starts at zero.
    pub fn complete(n: usize, d: usize) -> Result<Self> {
        if n < 2 || d < 1 {
            return Err(Error::invalid(format!(
                "complete graph needs n >= 2 and d >= 1 (got n={n}, d={d})"
            )));
        }
        Self::complete_with_modes(&vec![d; n], &[])
    }

    /// Complete graph where real vertex `i` supports `real_modes[i]` colors and virtual
    /// vertex `j` supports `virtual_modes[j]` input modes. Virtual vertices connect only
    /// to real vertices.
    pub fn complete_with_modes(real_modes: &[usize], virtual_modes: &[usize]) -> Result<Self> {
        let n_real = real_modes.len();
        if n_real < 2 {
            return Err(Error::invalid("need at least two real vertices"));
        }
        if real_modes.iter().chain(virtual_modes).any(|&m| m == 0) {
            return Err(Error::invalid("every vertex needs at least one mode"));
        }
        let d = real_modes
            .iter()
            .chain(virtual_modes)
            .copied()
            .max()
            .unwrap_or(1);
        let modes: Vec<usize> = real_modes.iter().chain(virtual_modes).copied().collect();
        let n = modes.len();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if u >= n_real && v >= n_real {
                    continue;
                }
                for cu in 0..modes[u] {
                    for cv in 0..modes[v] {
                        edges.push(Edge {
                            u,
                            v,
                            cu,
                            cv,
                            weight: Complex64::new(0.0, 0.0),
                        });
                    }
                }
            }
        }
        Ok(ColoredGraph {
            n_real,
            n_virtual: virtual_modes.len(),
            d_modes: d,
            edges,
        })
    }

    fn insert(&mut self, e: Edge) -> Result<()> {
        let key = EdgeKey::new(e.u, e.v, e.cu, e.cv)?;
        let n = self.n_vertices();
        if key.v >= n {
            return Err(Error::invalid(format!(
                "edge {key} references vertex {} but graph has {n}",
                key.v
            )));
        }
        if key.cu >= self.d_modes || key.cv >= self.d_modes {
            return Err(Error::invalid(format!(
                "edge {key} uses a color outside 0..{}",
                self.d_modes
            )));
        }
        if self.is_virtual(key.u) && self.is_virtual(key.v) {
            return Err(Error::invalid(format!(
                "edge {key} joins two virtual vertices"
            )));
        }
        match self.edges.binary_search_by(|x| x.key().cmp(&key)) {
            Ok(_) => Err(Error::invalid(format!("duplicate edge {key}"))),
            Err(pos) => {
                self.edges.insert(pos, Edge::from_key(key, e.weight));
                Ok(())
            }
        }
    }

    pub fn n_real(&self) -> usize {
        self.n_real
    }

    pub fn n_virtual(&self) -> usize {
        self.n_virtual
    }

    pub fn n_vertices(&self) -> usize {
        self.n_real + self.n_virtual
    }

    pub fn d_modes(&self) -> usize {
        self.d_modes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_virtual(&self, vertex: usize) -> bool {
        vertex >= self.n_real
    }

    pub fn vertex(&self, index: usize) -> Option<VertexId> {
        (index < self.n_vertices()).then(|| VertexId {
            index,
            kind: if self.is_virtual(index) {
                VertexKind::Virtual
            } else {
                VertexKind::Real
            },
        })
    }

    pub fn real_vertices(&self) -> std::ops::Range<usize> {
        0..self.n_real
    }

    pub fn virtual_vertices(&self) -> std::ops::Range<usize> {
        self.n_real..self.n_vertices()
    }

    pub fn edge_index(&self, key: &EdgeKey) -> Option<usize> {
        self.edges.binary_search_by(|x| x.key().cmp(key)).ok()
    }

    pub fn weights(&self) -> Vec<Complex64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Flat real parameter vector `[re0, im0, re1, im1, ...]`.
    pub fn weights_flat(&self) -> Vec<f64> {
        self.edges
            .iter()
            .flat_map(|e| [e.weight.re, e.weight.im])
            .collect()
    }

    pub fn with_weights(&self, weights: &[Complex64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::invalid(format!(
                "expected {} weights, got {}",
                self.edges.len(),
                weights.len()
            )));
        }
        let mut g = self.clone();
        for (e, &w) in g.edges.iter_mut().zip(weights) {
            e.weight = w;
        }
        Ok(g)
    }

    pub fn with_weights_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * self.edges.len() {
            return Err(Error::invalid(format!(
                "expected {} real parameters, got {}",
                2 * self.edges.len(),
                flat.len()
            )));
        }
        let weights: Vec<Complex64> = flat
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        self.with_weights(&weights)
    }

    /// Returns a copy with edge `index` removed; `self` is left untouched.
    pub fn remove_edge(&self, index: usize) -> Result<Self> {
        if index >= self.edges.len() {
            return Err(Error::invalid(format!(
                "edge index {index} out of range (graph has {} edges)",
                self.edges.len()
            )));
        }
        let mut g = self.clone();
        g.edges.remove(index);
        Ok(g)
    }

    /// Returns a copy with `edge` added.
    pub fn add_edge(&self, edge: Edge) -> Result<Self> {
        let mut g = self.clone();
        g.insert(edge)?;
        Ok(g)
    }

    /// Keeps only the edges for which `keep` is true.
    pub fn retain_edges(&self, keep: impl Fn(&Edge) -> bool) -> Self {
        let mut g = self.clone();
        g.edges.retain(|e| keep(e));
        g
    }

    /// Keeps the edges whose position in `mask` is true.
    pub fn retain_by_mask(&self, mask: &[bool]) -> Self {
        assert_eq!(
            mask.len(),
            self.edges.len(),
            "mask length must match edge count"
        );
        let mut g = self.clone();
        g.edges = self
            .edges
            .iter()
            .zip(mask)
            .filter(|(_, &k)| k)
            .map(|(e, _)| *e)
            .collect();
        g
    }

    /// Every edge subset covering each vertex of `cover` exactly once, using only edges
    /// with both endpoints in `cover`. Each matching lists its edge indices ascending
    /// and the sequence is sorted lexicographically.
    pub fn perfect_matchings(&self, cover: &[usize]) -> Vec<Matching> {
        let n = self.n_vertices();
        let mut in_cover = vec![false; n];
        for &v in cover {
            if v >= n {
                return Vec::new();
            }
            in_cover[v] = true;
        }
        let count = in_cover.iter().filter(|&&x| x).count();
        if count % 2 == 1 {
            return Vec::new();
        }

        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            if in_cover[e.u] && in_cover[e.v] {
                incident[e.u].push(i);
                incident[e.v].push(i);
            }
        }

        let mut out = Vec::new();
        let mut covered = vec![false; n];
        let mut current = Vec::with_capacity(count / 2);
        self.match_rec(&in_cover, &incident, &mut covered, &mut current, &mut out);
        for m in &mut out {
            m.edges.sort_unstable();
        }
        out.sort();
        out
    }

    fn match_rec(
        &self,
        in_cover: &[bool],
        incident: &[Vec<usize>],
        covered: &mut [bool],
        current: &mut Vec<usize>,
        out: &mut Vec<Matching>,
    ) {
        let first = (0..covered.len()).find(|&v| in_cover[v] && !covered[v]);
        let Some(v) = first else {
            out.push(Matching {
                edges: current.clone(),
            });
            return;
        };
        covered[v] = true;
        for &ei in &incident[v] {
            let e = &self.edges[ei];
            let w = if e.u == v { e.v } else { e.u };
            if covered[w] {
                continue;
            }
            covered[w] = true;
            current.push(ei);
            self.match_rec(in_cover, incident, covered, current, out);
            current.pop();
            covered[w] = false;
        }
        covered[v] = false;
    }

    /// Product of the weights of the edges in `m`.
    pub fn matching_weight(&self, m: &Matching) -> Complex64 {
        m.edges.iter().map(|&i| self.edges[i].weight).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn double_factorial_odd(m: usize) -> usize {
        (1..=m).map(|k| 2 * k - 1).product()
    }

    #[test]
    fn complete_graph_edge_counts() {
        assert_eq!(ColoredGraph::complete(4, 2).unwrap().edge_count(), 24);
        assert_eq!(ColoredGraph::complete(6, 3).unwrap().edge_count(), 135);
        assert_eq!(ColoredGraph::complete(2, 1).unwrap().edge_count(), 1);
        assert!(ColoredGraph::complete(4, 2)
            .unwrap()
            .weights()
            .iter()
            .all(|w| w.norm() == 0.0));
    }

    #[test]
    fn complete_graph_rejects_bad_parameters() {
        assert!(matches!(
            ColoredGraph::complete(1, 2),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            ColoredGraph::complete(4, 0),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn edges_are_canonical() {
        let e = Edge::new(3, 1, 2, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!((e.u, e.v, e.cu, e.cv), (1, 3, 0, 2));
        assert!(Edge::new(2, 2, 0, 0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn duplicate_edges_rejected_in_either_orientation() {
        let w = Complex64::new(1.0, 0.0);
        let g = ColoredGraph::from_edges(2, 0, 2, [Edge::new(0, 1, 0, 1, w).unwrap()]).unwrap();
        assert!(g.add_edge(Edge::new(1, 0, 1, 0, w).unwrap()).is_err());
        assert!(g.add_edge(Edge::new(1, 0, 0, 1, w).unwrap()).is_ok());
    }

    #[test]
    fn matching_counts_on_single_color_complete_graphs() {
        for m in 1..=4 {
            let g = ColoredGraph::complete(2 * m, 1).unwrap();
            let cover: Vec<usize> = (0..2 * m).collect();
            let ms = g.perfect_matchings(&cover);
            assert_eq!(ms.len(), double_factorial_odd(m), "m = {m}");
        }
    }

    #[test]
    fn odd_cover_has_no_matchings() {
        let g = ColoredGraph::complete(4, 1).unwrap();
        assert!(g.perfect_matchings(&[0, 1, 2]).is_empty());
    }

    #[test]
    fn matchings_are_valid_distinct_and_sorted() {
        let g = ColoredGraph::complete(6, 2).unwrap();
        let cover: Vec<usize> = (0..6).collect();
        let ms = g.perfect_matchings(&cover);
        assert_eq!(ms.len(), 15 * 64);
        for w in ms.windows(2) {
            assert!(w[0] < w[1]);
        }
        for m in &ms {
            let mut seen = [0usize; 6];
            for &i in &m.edges {
                let e = g.edges()[i];
                seen[e.u] += 1;
                seen[e.v] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
        assert_eq!(ms, g.perfect_matchings(&cover));
    }

    #[test]
    fn ghz_cycle_has_two_matchings_and_one_after_removal() {
        let g = catalog::ghz4_cycle();
        let cover: Vec<usize> = (0..4).collect();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.perfect_matchings(&cover).len(), 2);
        for i in 0..4 {
            let h = g.remove_edge(i).unwrap();
            assert_eq!(h.edge_count(), 3);
            assert_eq!(h.perfect_matchings(&cover).len(), 1);
        }
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn remove_edge_out_of_range() {
        let g = ColoredGraph::complete(4, 2).unwrap();
        assert_eq!(g.remove_edge(5).unwrap().edge_count(), 23);
        assert!(matches!(
            g.remove_edge(24),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn virtual_vertices_connect_only_to_real_ones() {
        let g = ColoredGraph::complete_with_modes(&[2, 2, 2, 2], &[2, 2]).unwrap();
        assert_eq!(g.n_virtual(), 2);
        assert_eq!(g.edge_count(), 24 + 2 * 4 * 4);
        assert!(g
            .edges()
            .iter()
            .all(|e| !(g.is_virtual(e.u) && g.is_virtual(e.v))));
        assert_eq!(g.vertex(5).unwrap().kind, VertexKind::Virtual);
        assert_eq!(g.vertex(1).unwrap().kind, VertexKind::Real);
    }

    #[test]
    fn retain_by_mask_keeps_order() {
        let g = ColoredGraph::complete(3, 1).unwrap();
        let h = g.retain_by_mask(&[true, false, true]);
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.edges()[0].key(), g.edges()[0].key());
        assert_eq!(h.edges()[1].key(), g.edges()[2].key());
    }

    #[test]
    fn flat_weights_roundtrip() {
        let g = ColoredGraph::complete(3, 2).unwrap();
        let flat: Vec<f64> = (0..2 * g.edge_count()).map(|i| i as f64 * 0.5).collect();
        let h = g.with_weights_flat(&flat).unwrap();
        assert_eq!(h.weights_flat(), flat);
        assert!(g.with_weights_flat(&flat[1..]).is_err());
    }
}
