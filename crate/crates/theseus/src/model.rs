//! Amplitudes of a conditioned graph state compiled into explicit polynomials.
//!
//! Every conditioned amplitude is a polynomial in the edge weights. Compiling the
//! polynomial once per topology makes repeated evaluation inside the optimizer cheap,
//! and restricting a compiled model to a subset of edges is just a filter, which is
//! how the pruning loop avoids recompiling after every removal.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockOccupation;
use crate::graph::ColoredGraph;
use crate::state::{ConditioningSpec, DetectorModel};

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    /// `(edge index, power)` pairs with distinct edges.
    pub factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn value(&self, w: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(self.coeff, 0.0);
        for &(e, p) in &self.factors {
            acc *= w[e].powu(p);
        }
        acc
    }
}

/// One conditioned amplitude: the polynomial for a given input, herald record and
/// output occupation.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub input: usize,
    pub herald: FockOccupation,
    pub output: FockOccupation,
    pub monomials: Vec<Monomial>,
}

impl Slot {
    pub fn value(&self, w: &[Complex64]) -> Complex64 {
        self.monomials.iter().map(|m| m.value(w)).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeModel {
    n_edges: usize,
    n_inputs: usize,
    slots: Vec<Slot>,
}

/// Per-vertex photon limits used while enumerating edge multisets.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Output,
    Herald,
    Virtual,
}

impl AmplitudeModel {
    /// Compiles the conditioned amplitudes of `g`. Graphs with virtual vertices need one
    /// mode assignment per virtual vertex for each input; graphs without them use a single
    /// implicit input and `inputs` must be empty.
    pub fn build(g: &ColoredGraph, cond: &ConditioningSpec, inputs: &[Vec<usize>]) -> Result<Self> {
        cond.validate(g)?;
        let implicit = [Vec::new()];
        let inputs: &[Vec<usize>] = if g.n_virtual() == 0 {
            if inputs.iter().any(|i| !i.is_empty()) {
                return Err(Error::invalid(
                    "graph has no virtual vertices to take inputs",
                ));
            }
            &implicit
        } else {
            if inputs.is_empty() {
                return Err(Error::invalid(
                    "graph has virtual vertices but no input assignments were given",
                ));
            }
            inputs
        };
        for (i, inp) in inputs.iter().enumerate() {
            if inp.len() != g.n_virtual() {
                return Err(Error::invalid(format!(
                    "input {i} assigns {} modes but the graph has {} virtual vertices",
                    inp.len(),
                    g.n_virtual()
                )));
            }
        }

        let mut slots = Vec::new();
        for (i, inp) in inputs.iter().enumerate() {
            let grouped = if cond.single_photon_regime() {
                matching_terms(g, cond, inp)
            } else {
                multiset_terms(g, cond, inp)
            };
            for ((herald, output), mut monomials) in grouped {
                monomials.sort_by(|a, b| a.factors.cmp(&b.factors));
                slots.push(Slot {
                    input: i,
                    herald,
                    output,
                    monomials,
                });
            }
        }
        Ok(AmplitudeModel {
            n_edges: g.edge_count(),
            n_inputs: inputs.len(),
            slots,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn monomial_count(&self) -> usize {
        self.slots.iter().map(|s| s.monomials.len()).sum()
    }

    pub fn amplitudes(&self, w: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(w.len(), self.n_edges);
        self.slots.iter().map(|s| s.value(w)).collect()
    }

    /// The model of the subgraph keeping edges where `keep[e]` is true. Edge indices are
    /// renumbered to match the subgraph's edge order, and monomials that use a dropped
    /// edge disappear.
    pub fn restrict(&self, keep: &[bool]) -> AmplitudeModel {
        assert_eq!(
            keep.len(),
            self.n_edges,
            "mask length must match edge count"
        );
        let mut remap = vec![usize::MAX; self.n_edges];
        let mut next = 0;
        for (e, &k) in keep.iter().enumerate() {
            if k {
                remap[e] = next;
                next += 1;
            }
        }
        let slots = self
            .slots
            .iter()
            .filter_map(|s| {
                let monomials: Vec<Monomial> = s
                    .monomials
                    .iter()
                    .filter(|m| m.factors.iter().all(|&(e, _)| keep[e]))
                    .map(|m| Monomial {
                        coeff: m.coeff,
                        factors: m.factors.iter().map(|&(e, p)| (remap[e], p)).collect(),
                    })
                    .collect();
                (!monomials.is_empty()).then(|| Slot {
                    input: s.input,
                    herald: s.herald.clone(),
                    output: s.output.clone(),
                    monomials,
                })
            })
            .collect();
        AmplitudeModel {
            n_edges: next,
            n_inputs: self.n_inputs,
            slots,
        }
    }
}

type Grouped = BTreeMap<(FockOccupation, FockOccupation), Vec<Monomial>>;

fn split(cond: &ConditioningSpec, occ: &FockOccupation) -> (FockOccupation, FockOccupation) {
    (
        occ.restrict(|v| cond.herald_vertices.contains(&v)),
        occ.restrict(|v| cond.output_vertices.contains(&v)),
    )
}

/// Every real vertex ends with exactly one photon, so the contributing edge sets are the
/// perfect matchings of the whole graph whose virtual endpoints carry the input modes.
fn matching_terms(g: &ColoredGraph, cond: &ConditioningSpec, input: &[usize]) -> Grouped {
    let cover: Vec<usize> = (0..g.n_vertices()).collect();
    let pair_budget = cond.effective_max_pairs(g);
    let mut out = Grouped::new();
    for m in g.perfect_matchings(&cover) {
        let mut ok = true;
        let mut pairs = 0;
        let mut counts = Vec::with_capacity(2 * m.edges.len());
        for &ei in &m.edges {
            let e = g.edges()[ei];
            for (v, c) in [(e.u, e.cu), (e.v, e.cv)] {
                if g.is_virtual(v) {
                    ok &= input[v - g.n_real()] == c;
                } else {
                    counts.push((v, c, 1));
                }
            }
            if !g.is_virtual(e.u) && !g.is_virtual(e.v) {
                pairs += 1;
            }
        }
        if !ok || pairs > pair_budget {
            continue;
        }
        let occ = FockOccupation::from_counts(counts);
        out.entry(split(cond, &occ)).or_default().push(Monomial {
            coeff: 1.0,
            factors: m.edges.iter().map(|&e| (e, 1)).collect(),
        });
    }
    out
}

struct Enumerator<'a> {
    g: &'a ColoredGraph,
    cond: &'a ConditioningSpec,
    input: &'a [usize],
    roles: Vec<Role>,
    caps: Vec<u32>,
    allowed: Vec<bool>,
    load: Vec<u32>,
    counts: Vec<u32>,
    out: Grouped,
}

/// General case: enumerate edge multisets with at most `max_pairs` pair-creation events,
/// weighting each by `Π ω^k / k!` and the bosonic factor `Π sqrt(n!)`.
fn multiset_terms(g: &ColoredGraph, cond: &ConditioningSpec, input: &[usize]) -> Grouped {
    let max_pairs = cond.effective_max_pairs(g);
    let n = g.n_vertices();
    let mut roles = vec![Role::Output; n];
    let mut caps = vec![u32::MAX; n];
    for v in 0..n {
        if g.is_virtual(v) {
            roles[v] = Role::Virtual;
            caps[v] = 1;
        } else if cond.herald_vertices.contains(&v) {
            roles[v] = Role::Herald;
            if cond.detector == DetectorModel::NumberResolvingOne {
                caps[v] = 1;
            }
        } else if cond.postselect_outputs {
            caps[v] = 1;
        }
    }
    let allowed = g
        .edges()
        .iter()
        .map(|e| {
            [(e.u, e.cu), (e.v, e.cv)]
                .iter()
                .all(|&(v, c)| !g.is_virtual(v) || input[v - g.n_real()] == c)
        })
        .collect();
    let mut en = Enumerator {
        g,
        cond,
        input,
        roles,
        caps,
        allowed,
        load: vec![0; n],
        counts: vec![0; g.edge_count()],
        out: Grouped::new(),
    };
    en.recurse(0, max_pairs);
    en.out
}

impl Enumerator<'_> {
    fn recurse(&mut self, idx: usize, pairs_left: usize) {
        if idx == self.g.edge_count() {
            self.emit();
            return;
        }
        self.recurse(idx + 1, pairs_left);
        if !self.allowed[idx] {
            return;
        }
        let e = self.g.edges()[idx];
        let is_virtual_edge = self.g.is_virtual(e.u) || self.g.is_virtual(e.v);
        let mut k = 0u32;
        loop {
            k += 1;
            if is_virtual_edge && k > 1 {
                break;
            }
            if !is_virtual_edge && (k as usize) > pairs_left {
                break;
            }
            if self.load[e.u] + k > self.caps[e.u] || self.load[e.v] + k > self.caps[e.v] {
                break;
            }
            self.load[e.u] += k;
            self.load[e.v] += k;
            self.counts[idx] = k;
            let left = if is_virtual_edge {
                pairs_left
            } else {
                pairs_left - k as usize
            };
            self.recurse(idx + 1, left);
            self.counts[idx] = 0;
            self.load[e.u] -= k;
            self.load[e.v] -= k;
        }
    }

    fn emit(&mut self) {
        for (v, role) in self.roles.iter().enumerate() {
            let n = self.load[v];
            let ok = match role {
                Role::Virtual => n == 1,
                Role::Herald => match self.cond.detector {
                    DetectorModel::NumberResolvingOne => n == 1,
                    DetectorModel::ThresholdAtLeastOne => n >= 1,
                },
                Role::Output => !self.cond.postselect_outputs || n == 1,
            };
            if !ok {
                return;
            }
        }
        let mut coeff = 1.0;
        let mut factors = Vec::new();
        let mut photons = Vec::new();
        for (ei, &k) in self.counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            coeff /= factorial(k);
            factors.push((ei, k));
            let e = self.g.edges()[ei];
            for (v, c) in [(e.u, e.cu), (e.v, e.cv)] {
                if !self.g.is_virtual(v) {
                    photons.push((v, c, k));
                }
            }
        }
        let occ = FockOccupation::from_counts(photons);
        for &(_, _, n) in occ.entries() {
            coeff *= factorial(n).sqrt();
        }
        debug_assert!(self.input.len() == self.g.n_virtual());
        self.out
            .entry(split(self.cond, &occ))
            .or_default()
            .push(Monomial { coeff, factors });
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn restrict_drops_monomials_using_removed_edges() {
        let g = catalog::ghz4_cycle();
        let cond = ConditioningSpec::postselected(&g);
        let model = AmplitudeModel::build(&g, &cond, &[]).unwrap();
        assert_eq!(model.monomial_count(), 2);
        let sub = model.restrict(&[true, false, true, true]);
        assert_eq!(sub.n_edges(), 3);
        assert_eq!(sub.monomial_count(), 1);

        let direct = AmplitudeModel::build(&g.remove_edge(1).unwrap(), &cond, &[]).unwrap();
        assert_eq!(sub, direct);
    }

    #[test]
    fn general_and_matching_paths_agree_when_both_apply() {
        let g = catalog::ghz4_cycle();
        let cond = ConditioningSpec::postselected(&g);
        let sorted = |mut grouped: Grouped| {
            for v in grouped.values_mut() {
                v.sort_by(|a, b| a.factors.cmp(&b.factors));
            }
            grouped
        };
        let fast = sorted(matching_terms(&g, &cond, &[]));
        let slow = sorted(multiset_terms(&g, &cond, &[]));
        assert_eq!(fast, slow);
    }
}
