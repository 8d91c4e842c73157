//! Schmidt-rank vectors of tripartite states and the benchmark that tries to produce
//! one state per rank class.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{theseus_with_limits, PrunePolicy, SearchLimits, SearchSpace, Solution};
use crate::error::{Error, Result};
use crate::fock::{FockOccupation, KetTerm};
use crate::graph::ColoredGraph;
use crate::objective::{Target, TargetState};
use crate::optimizer::OptimizerConfig;
use crate::state::{heralded_state, ConditioningSpec, DetectorModel};

/// Singular values at or below this are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Ranks of the three single-party reduced states, largest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchmidtRankVector {
    pub ranks: [usize; 3],
}

impl SchmidtRankVector {
    /// Checks that the ranks are sorted, positive, and compatible: no party can be more
    /// entangled than the other two together.
    pub fn new(ranks: [usize; 3]) -> Result<Self> {
        let [a, b, c] = ranks;
        if c == 0 || a < b || b < c {
            return Err(Error::invalid(format!(
                "ranks must be positive and non-increasing, got {ranks:?}"
            )));
        }
        if a > b * c {
            return Err(Error::invalid(format!(
                "rank vector {ranks:?} is infeasible: {a} > {b}·{c}"
            )));
        }
        Ok(SchmidtRankVector { ranks })
    }
}

impl fmt::Display for SchmidtRankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.ranks;
        write!(f, "({a},{b},{c})")
    }
}

/// Rank vector of a normalized three-party state given as ket amplitudes.
pub fn srv_of_state(
    state: &BTreeMap<KetTerm, Complex64>,
    dims: [usize; 3],
) -> Result<SchmidtRankVector> {
    let norm: f64 = state.values().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "state has squared norm {norm}, expected 1"
        )));
    }
    for k in state.keys() {
        if k.len() != 3 {
            return Err(Error::InvalidState(format!("ket {k} is not tripartite")));
        }
        if k.modes.iter().zip(dims).any(|(&m, d)| m >= d) {
            return Err(Error::InvalidState(format!(
                "ket {k} exceeds local dimensions {dims:?}"
            )));
        }
    }
    let mut ranks = [0; 3];
    for (party, rank) in ranks.iter_mut().enumerate() {
        let (o1, o2) = match party {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let rows = dims[party];
        let cols = dims[o1] * dims[o2];
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for (k, a) in state {
            m[(k.modes[party], k.modes[o1] * dims[o2] + k.modes[o2])] += *a;
        }
        *rank = m
            .singular_values()
            .iter()
            .filter(|&&s| s > RANK_THRESHOLD)
            .count();
    }
    ranks.sort_unstable_by(|a, b| b.cmp(a));
    Ok(SchmidtRankVector { ranks })
}

/// A reference state of the given class: `(1/√r1) Σ_i |i, f(i), g(i)⟩` with distinct
/// pairs `(f(i), g(i))`. The first `r2` pairs are `(j, j mod r3)`, so both later
/// parties see all their levels; the rest are filled in lexicographic order.
pub fn srv_target(class: SchmidtRankVector) -> TargetState {
    let [r1, r2, r3] = class.ranks;
    let mut pairs: Vec<(usize, usize)> = (0..r2).map(|j| (j, j % r3)).collect();
    'fill: for f in 0..r2 {
        for g in 0..r3 {
            if pairs.len() == r1 {
                break 'fill;
            }
            if !pairs.contains(&(f, g)) {
                pairs.push((f, g));
            }
        }
    }
    pairs.truncate(r1);
    TargetState::new(
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, (f, g))| (KetTerm::new(vec![i, f, g]), Complex64::new(1.0, 0.0))),
    )
    .expect("nonempty")
}

/// Genuinely tripartite classes (every rank at least 2) with ranks up to `max_dim`,
/// ordered by largest rank and then lexicographically.
pub fn srv_classes(max_dim: usize) -> Vec<SchmidtRankVector> {
    let mut out = Vec::new();
    for a in 2..=max_dim {
        for b in 2..=a {
            for c in 2..=b {
                if let Ok(s) = SchmidtRankVector::new([a, b, c]) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Three output paths with `r1, r2, r3` modes plus three single-mode trigger paths. All
/// six paths are post-selected on one photon each.
pub fn srv_search_space(class: SchmidtRankVector) -> Result<SearchSpace> {
    let [r1, r2, r3] = class.ranks;
    let initial = ColoredGraph::complete_with_modes(&[r1, r2, r3, 1, 1, 1], &[])?;
    let conditioning = ConditioningSpec::heralded(
        &initial,
        &[3, 4, 5],
        DetectorModel::NumberResolvingOne,
        None,
    )
    .with_postselected_outputs(true);
    Ok(SearchSpace {
        initial,
        conditioning,
    })
}

/// The normalized output state of a benchmark graph, ready for [`srv_of_state`].
pub fn output_state(
    g: &ColoredGraph,
    cond: &ConditioningSpec,
) -> Result<BTreeMap<KetTerm, Complex64>> {
    let h = heralded_state(g, cond)?;
    let kets = h.kets(&cond.output_vertices);
    let branch = kets
        .get(&FockOccupation::from_counts(
            cond.herald_vertices.iter().map(|&v| (v, 0, 1)),
        ))
        .cloned()
        .unwrap_or_default();
    let norm = branch.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok(branch.into_iter().map(|(k, a)| (k, a / norm)).collect())
}

#[derive(Clone, Debug)]
pub struct SrvReport {
    /// Classes whose solution qualified and whose output state has exactly that class.
    pub found: BTreeMap<SchmidtRankVector, Solution>,
    /// Classes that were attempted but not confirmed, with the measured rank vector of
    /// the best graph when one could be computed.
    pub missed: BTreeMap<SchmidtRankVector, Option<SchmidtRankVector>>,
    pub elapsed: Duration,
}

/// Runs the search for every class up to `max_dim`, in parallel, stopping new work once
/// `budget` has elapsed.
pub fn srv_benchmark(
    max_dim: usize,
    budget: Duration,
    cfg: &OptimizerConfig,
    policy: &PrunePolicy,
) -> Result<SrvReport> {
    if !(2..=10).contains(&max_dim) {
        return Err(Error::invalid(format!(
            "max_dim must lie in 2..=10, got {max_dim}"
        )));
    }
    let start = Instant::now();
    let deadline = start + budget;
    let classes = srv_classes(max_dim);

    let results: Vec<(
        SchmidtRankVector,
        Option<Solution>,
        Option<SchmidtRankVector>,
    )> = classes
        .par_iter()
        .map(|&class| {
            if Instant::now() >= deadline {
                return (class, None, None);
            }
            let Ok(space) = srv_search_space(class) else {
                return (class, None, None);
            };
            let target = Target::State(srv_target(class));
            let limits = SearchLimits {
                max_steps: None,
                deadline: Some(deadline),
            };
            match theseus_with_limits(&target, &space, cfg, policy, limits) {
                Ok(sol) => {
                    let measured = output_state(&sol.graph, &space.conditioning)
                        .and_then(|s| srv_of_state(&s, class.ranks))
                        .ok();
                    if sol.qualified && measured == Some(class) {
                        (class, Some(sol), measured)
                    } else {
                        (class, None, measured)
                    }
                }
                Err(_) => (class, None, None),
            }
        })
        .collect();

    let mut found = BTreeMap::new();
    let mut missed = BTreeMap::new();
    for (class, sol, measured) in results {
        match sol {
            Some(s) => {
                found.insert(class, s);
            }
            None => {
                missed.insert(class, measured);
            }
        }
    }
    Ok(SrvReport {
        found,
        missed,
        elapsed: start.elapsed(),
    })
}
