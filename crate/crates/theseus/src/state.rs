//! Quantum states generated by a graph.
//!
//! A graph stands for a set of probabilistic photon-pair sources. The full emitted state
//! is the pair-creation expansion `Φ(ω)`; experiments see it only through conditioning,
//! either post-selection (one photon per path) or heralding (detector clicks on ancilla
//! paths). The functions here compute both pictures.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockOccupation, FockState, KetTerm, AMPLITUDE_FLOOR};
use crate::graph::ColoredGraph;
use crate::model::{factorial, AmplitudeModel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorModel {
    /// The herald fires only on exactly one photon.
    NumberResolvingOne,
    /// The herald fires on one or more photons.
    #[default]
    ThresholdAtLeastOne,
}

impl std::str::FromStr for DetectorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "number_resolving_one" | "number-resolving" | "nr" => {
                Ok(DetectorModel::NumberResolvingOne)
            }
            "threshold_at_least_one" | "threshold" | "thr" => {
                Ok(DetectorModel::ThresholdAtLeastOne)
            }
            other => Err(Error::invalid(format!("unknown detector model `{other}`"))),
        }
    }
}

/// Which paths are kept and which are measured, and how far to expand `Φ(ω)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningSpec {
    pub output_vertices: Vec<usize>,
    pub herald_vertices: Vec<usize>,
    pub detector: DetectorModel,
    /// Number of pair-creation events to keep. `None` means the leading order plus two.
    pub max_pairs: Option<usize>,
    /// Require exactly one photon on every output path as well.
    pub postselect_outputs: bool,
}

impl ConditioningSpec {
    /// One photon in every real path.
    pub fn postselected(g: &ColoredGraph) -> Self {
        ConditioningSpec {
            output_vertices: g.real_vertices().collect(),
            herald_vertices: Vec::new(),
            detector: DetectorModel::default(),
            max_pairs: None,
            postselect_outputs: true,
        }
    }

    /// Heralds on `heralds`; every other real vertex is an unmeasured output.
    pub fn heralded(
        g: &ColoredGraph,
        heralds: &[usize],
        detector: DetectorModel,
        max_pairs: Option<usize>,
    ) -> Self {
        let mut herald_vertices = heralds.to_vec();
        herald_vertices.sort_unstable();
        herald_vertices.dedup();
        ConditioningSpec {
            output_vertices: g
                .real_vertices()
                .filter(|v| !herald_vertices.contains(v))
                .collect(),
            herald_vertices,
            detector,
            max_pairs,
            postselect_outputs: false,
        }
    }

    pub fn with_postselected_outputs(mut self, on: bool) -> Self {
        self.postselect_outputs = on;
        self
    }

    pub fn validate(&self, g: &ColoredGraph) -> Result<()> {
        let mut seen = vec![0u8; g.n_real()];
        for &v in self.output_vertices.iter().chain(&self.herald_vertices) {
            if v >= g.n_real() {
                return Err(Error::invalid(format!(
                    "conditioning names vertex {v}, which is not a real vertex"
                )));
            }
            seen[v] += 1;
        }
        if seen.iter().any(|&s| s != 1) {
            return Err(Error::invalid(
                "output and herald vertices must be disjoint and cover every real vertex",
            ));
        }
        if !self.output_vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "output vertices must be listed in ascending order",
            ));
        }
        if let Some(k) = self.max_pairs {
            if k < leading_pairs(g) {
                return Err(Error::invalid(format!(
                    "max_pairs = {k} cannot reach the leading order of {} pairs",
                    leading_pairs(g)
                )));
            }
        }
        Ok(())
    }

    pub fn effective_max_pairs(&self, g: &ColoredGraph) -> usize {
        self.max_pairs.unwrap_or(leading_pairs(g) + 2)
    }

    /// True when every real vertex must end with exactly one photon, in which case the
    /// contributing terms are exactly the perfect matchings.
    pub fn single_photon_regime(&self) -> bool {
        self.postselect_outputs
            && (self.herald_vertices.is_empty()
                || self.detector == DetectorModel::NumberResolvingOne)
    }
}

/// Pair-creation events needed to put one photon in every real path.
pub fn leading_pairs(g: &ColoredGraph) -> usize {
    g.n_real().saturating_sub(g.n_virtual()).div_ceil(2)
}

/// Post-selected amplitudes with their normalization `N = sqrt(Σ|a|²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PostSelectedState {
    pub terms: BTreeMap<KetTerm, Complex64>,
    pub norm: f64,
}

/// A conditioned state split by herald record. Within one branch amplitudes add
/// coherently; distinct branches are distinguishable detector outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedState {
    pub branches: BTreeMap<FockOccupation, BTreeMap<FockOccupation, Complex64>>,
    pub norm: f64,
}

impl HeraldedState {
    fn from_model(model: &AmplitudeModel, input: usize, w: &[Complex64]) -> Self {
        let mut branches: BTreeMap<FockOccupation, BTreeMap<FockOccupation, Complex64>> =
            BTreeMap::new();
        let mut norm_sqr = 0.0;
        for slot in model.slots().iter().filter(|s| s.input == input) {
            let a = slot.value(w);
            if a.norm() <= AMPLITUDE_FLOOR {
                continue;
            }
            norm_sqr += a.norm_sqr();
            branches
                .entry(slot.herald.clone())
                .or_default()
                .insert(slot.output.clone(), a);
        }
        HeraldedState {
            branches,
            norm: norm_sqr.sqrt(),
        }
    }

    /// Each branch's output amplitudes written as kets over `outputs`. Output patterns
    /// that are not one photon per output vertex are left out.
    pub fn kets(
        &self,
        outputs: &[usize],
    ) -> BTreeMap<FockOccupation, BTreeMap<KetTerm, Complex64>> {
        self.branches
            .iter()
            .map(|(h, b)| {
                let kets = b
                    .iter()
                    .filter_map(|(o, a)| o.as_ket(outputs).map(|k| (k, *a)))
                    .collect();
                (h.clone(), kets)
            })
            .collect()
    }
}

/// Sum over perfect matchings whose colors at each real vertex equal the ket's modes.
pub fn term_amplitude(g: &ColoredGraph, t: &KetTerm) -> Result<Complex64> {
    if t.len() != g.n_real() || g.n_virtual() != 0 {
        return Err(Error::invalid(format!(
            "ket {t} must assign one mode to each of the {} real vertices of a graph without inputs",
            g.n_real()
        )));
    }
    let cover: Vec<usize> = g.real_vertices().collect();
    Ok(g.perfect_matchings(&cover)
        .iter()
        .filter(|m| {
            m.edges.iter().all(|&i| {
                let e = g.edges()[i];
                t.modes[e.u] == e.cu && t.modes[e.v] == e.cv
            })
        })
        .map(|m| g.matching_weight(m))
        .sum())
}

/// All nonzero post-selected amplitudes (unnormalized) and their norm.
pub fn postselected_state(g: &ColoredGraph) -> Result<PostSelectedState> {
    if g.n_virtual() != 0 {
        return Err(Error::invalid(
            "graphs with virtual vertices describe transformations, not states",
        ));
    }
    if g.n_real() % 2 == 1 {
        return Err(Error::invalid(
            "post-selection needs an even number of vertices",
        ));
    }
    let cond = ConditioningSpec::postselected(g);
    let model = AmplitudeModel::build(g, &cond, &[])?;
    let vertices = cond.output_vertices.clone();
    let w = g.weights();
    let mut terms = BTreeMap::new();
    for slot in model.slots() {
        let a = slot.value(&w);
        if a.norm() > AMPLITUDE_FLOOR {
            let ket = slot
                .output
                .as_ket(&vertices)
                .expect("post-selected occupations hold one photon per vertex");
            terms.insert(ket, a);
        }
    }
    let norm = terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if terms.is_empty() {
        return Err(Error::DegenerateState);
    }
    Ok(PostSelectedState { terms, norm })
}

/// The pair-creation expansion truncated at `max_pairs` events, including vacuum.
///
/// Virtual vertices are ignored here: they describe inputs, not sources.
pub fn expand_phi(g: &ColoredGraph, max_pairs: usize) -> FockState {
    let edges: Vec<_> = g
        .edges()
        .iter()
        .filter(|e| !g.is_virtual(e.u) && !g.is_virtual(e.v))
        .copied()
        .collect();
    let mut state = FockState::new();
    let mut counts = vec![0u32; edges.len()];
    expand_rec(&edges, 0, max_pairs, &mut counts, &mut state);
    state.prune();
    state
}

fn expand_rec(
    edges: &[crate::graph::Edge],
    idx: usize,
    left: usize,
    counts: &mut [u32],
    state: &mut FockState,
) {
    if idx == edges.len() {
        let mut amp = Complex64::new(1.0, 0.0);
        let mut photons = Vec::new();
        for (e, &k) in edges.iter().zip(counts.iter()) {
            if k > 0 {
                amp *= e.weight.powu(k) / factorial(k);
                photons.push((e.u, e.cu, k));
                photons.push((e.v, e.cv, k));
            }
        }
        let occ = FockOccupation::from_counts(photons);
        for &(_, _, n) in occ.entries() {
            amp *= factorial(n).sqrt();
        }
        state.accumulate(occ, amp);
        return;
    }
    for k in 0..=left {
        counts[idx] = k as u32;
        expand_rec(edges, idx + 1, left - k, counts, state);
    }
    counts[idx] = 0;
}

/// Conditions the emitted state on the herald detectors and groups it by herald record.
pub fn heralded_state(g: &ColoredGraph, c: &ConditioningSpec) -> Result<HeraldedState> {
    if g.n_virtual() != 0 {
        return Err(Error::invalid(
            "graph has virtual vertices; use transformation_outputs",
        ));
    }
    let model = AmplitudeModel::build(g, c, &[])?;
    let s = HeraldedState::from_model(&model, 0, &g.weights());
    if s.branches.is_empty() {
        return Err(Error::DegenerateState);
    }
    Ok(s)
}

/// Conditioned output state for each input assignment of the virtual vertices.
pub fn transformation_outputs(
    g: &ColoredGraph,
    input_basis: &[Vec<usize>],
    c: &ConditioningSpec,
) -> Result<Vec<HeraldedState>> {
    if g.n_virtual() == 0 {
        return Err(Error::invalid("graph has no virtual vertices"));
    }
    for (v, mode) in input_basis
        .iter()
        .flat_map(|inp| inp.iter().enumerate())
        .map(|(j, &m)| (g.n_real() + j, m))
    {
        if !g.edges().iter().any(|e| e.key().color_at(v) == Some(mode)) {
            return Err(Error::invalid(format!(
                "virtual vertex {v} has no edge carrying input mode {mode}"
            )));
        }
    }
    let model = AmplitudeModel::build(g, c, input_basis)?;
    let w = g.weights();
    let outs: Vec<HeraldedState> = (0..input_basis.len())
        .map(|i| HeraldedState::from_model(&model, i, &w))
        .collect();
    if outs.iter().all(|s| s.branches.is_empty()) {
        return Err(Error::DegenerateState);
    }
    Ok(outs)
}

/// Total probability of all herald-satisfying events within the truncation.
pub fn event_probability(g: &ColoredGraph, c: &ConditioningSpec) -> Result<f64> {
    let model = AmplitudeModel::build(g, c, &[])?;
    let w = g.weights();
    Ok(model.amplitudes(&w).iter().map(|a| a.norm_sqr()).sum())
}

/// Expected detection rate in Hz for a per-pulse probability `p`.
pub fn count_rate(p: f64, rep_rate: f64) -> f64 {
    p * rep_rate
}
