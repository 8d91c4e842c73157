//! Topological search: optimize the weights of a graph, remove an edge, re-optimize,
//! and put the edge back when the smaller graph can no longer reach the target.

mod prune;
pub mod scaling;
pub mod srv;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use prune::{boltzmann_probabilities, select_edge_to_prune, PrunePolicy};

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, EdgeKey};
use crate::objective::{Objective, Target};
use crate::optimizer::{optimize_with_restarts, OptimizerConfig, RestartOutcome};
use crate::state::{ConditioningSpec, DetectorModel};

/// The starting graph and the conditioning under which it is judged.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    pub initial: ColoredGraph,
    pub conditioning: ConditioningSpec,
}

impl SearchSpace {
    /// Complete graph on `n` vertices with `d` modes. Herald vertices get a single mode,
    /// so each herald pattern is one detector record.
    pub fn for_state(
        n: usize,
        d: usize,
        heralds: &[usize],
        detector: DetectorModel,
        max_pairs: Option<usize>,
        postselect_outputs: bool,
    ) -> Result<Self> {
        Self::build(n, 0, d, heralds, detector, max_pairs, postselect_outputs)
    }

    /// Complete graph with `n_real` path vertices and `n_virtual` input vertices, each
    /// non-herald vertex carrying `d` modes.
    pub fn for_gate(
        n_real: usize,
        n_virtual: usize,
        d: usize,
        heralds: &[usize],
        detector: DetectorModel,
        max_pairs: Option<usize>,
    ) -> Result<Self> {
        Self::build(n_real, n_virtual, d, heralds, detector, max_pairs, true)
    }

    fn build(
        n_real: usize,
        n_virtual: usize,
        d: usize,
        heralds: &[usize],
        detector: DetectorModel,
        max_pairs: Option<usize>,
        postselect_outputs: bool,
    ) -> Result<Self> {
        if n_real < 2 || d < 1 {
            return Err(Error::invalid(format!(
                "need at least 2 vertices and 1 mode (got {n_real}, {d})"
            )));
        }
        if let Some(&h) = heralds.iter().find(|&&h| h >= n_real) {
            return Err(Error::invalid(format!("herald {h} is not a vertex")));
        }
        let real_modes: Vec<usize> = (0..n_real)
            .map(|v| if heralds.contains(&v) { 1 } else { d })
            .collect();
        let initial = ColoredGraph::complete_with_modes(&real_modes, &vec![d; n_virtual])?;
        let conditioning = ConditioningSpec::heralded(&initial, heralds, detector, max_pairs)
            .with_postselected_outputs(postselect_outputs || heralds.is_empty());
        conditioning.validate(&initial)?;
        Ok(SearchSpace {
            initial,
            conditioning,
        })
    }
}

/// One prune attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    /// `None` for the initial optimization of the complete graph.
    pub edge: Option<EdgeKey>,
    pub accepted: bool,
    pub fidelity: f64,
    pub loss: f64,
    pub restarts: usize,
    pub edges: usize,
    /// Seconds since the search started.
    pub time: f64,
}

/// Result of a search. When every conditioned amplitude has the same degree in the
/// weights, qualified weights are rescaled so the largest one sits at `omega_limit`;
/// `loss` is evaluated at the weights actually stored in `graph`.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub graph: ColoredGraph,
    pub fidelity: f64,
    pub loss: f64,
    pub qualified: bool,
    pub trace: Vec<TraceRecord>,
    pub wall_time: f64,
}

/// Extra stopping conditions for [`theseus_with_limits`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchLimits {
    /// Prune attempts allowed; defaults to five per initial edge.
    pub max_steps: Option<usize>,
    /// Stop pruning once this instant has passed.
    pub deadline: Option<Instant>,
}

pub fn theseus(
    target: &Target,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    policy: &PrunePolicy,
) -> Result<Solution> {
    theseus_with_limits(target, space, cfg, policy, SearchLimits::default())
}

pub fn theseus_with_limits(
    target: &Target,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    policy: &PrunePolicy,
    limits: SearchLimits,
) -> Result<Solution> {
    cfg.validate()?;
    let start = Instant::now();
    let full = &space.initial;
    let objective = Objective::new(full, target, &space.conditioning, cfg.alpha, cfg.l1_norm)?;
    let n_full = full.edge_count();
    let budget = limits.max_steps.unwrap_or(5 * n_full);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);

    let first = optimize_with_restarts(&objective, None, cfg, 0);
    let mut trace = vec![TraceRecord {
        step: 0,
        edge: None,
        accepted: first.qualified,
        fidelity: first.fidelity,
        loss: first.loss,
        restarts: first.restarts,
        edges: n_full,
        time: start.elapsed().as_secs_f64(),
    }];
    let mut mask = vec![true; n_full];
    let homogeneous = space.conditioning.single_photon_regime();
    let solution =
        |mask: &[bool], out: &RestartOutcome, trace: Vec<TraceRecord>| -> Result<Solution> {
            let kept = full.retain_by_mask(mask);
            let mut x = out.x.clone();
            let mut loss = out.loss;
            let magnitude = cfg.weight_magnitude(&x);
            if homogeneous && magnitude > 0.0 && out.qualified {
                // Every conditioned amplitude has the same degree here, so a global rescale
                // leaves the state untouched while the weights become readable.
                let scale = cfg.omega_limit / magnitude;
                x.iter_mut().for_each(|v| *v *= scale);
                if let Ok(l) = objective.restrict(mask).loss(&x) {
                    loss = l;
                }
            }
            Ok(Solution {
                graph: kept.with_weights_flat(&x)?,
                fidelity: out.fidelity,
                loss,
                qualified: out.qualified,
                trace,
                wall_time: start.elapsed().as_secs_f64(),
            })
        };
    if !first.qualified {
        return Err(Error::SearchFailed(Box::new(solution(
            &mask, &first, trace,
        )?)));
    }

    let mut current = first;
    let mut untriable: BTreeSet<usize> = BTreeSet::new();
    for step in 1..=budget {
        if limits.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let present: Vec<usize> = (0..n_full).filter(|&e| mask[e]).collect();
        let candidates: Vec<(usize, usize)> = present
            .iter()
            .enumerate()
            .filter(|(_, e)| !untriable.contains(e))
            .map(|(pos, &e)| (pos, e))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let moduli: Vec<f64> = candidates
            .iter()
            .map(|&(pos, _)| current.x[2 * pos].hypot(current.x[2 * pos + 1]))
            .collect();
        let pick = select_edge_to_prune(&moduli, policy, &mut rng)?;
        let (pos, edge) = candidates[pick];

        let mut trial_mask = mask.clone();
        trial_mask[edge] = false;
        let warm: Vec<f64> = current
            .x
            .chunks_exact(2)
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .flat_map(|(_, c)| c.iter().copied())
            .collect();
        let sub = objective.restrict(&trial_mask);
        let out = optimize_with_restarts(&sub, Some(&warm), cfg, step as u64);
        trace.push(TraceRecord {
            step,
            edge: Some(full.edges()[edge].key()),
            accepted: out.qualified,
            fidelity: out.fidelity,
            loss: out.loss,
            restarts: out.restarts,
            edges: if out.qualified {
                present.len() - 1
            } else {
                present.len()
            },
            time: start.elapsed().as_secs_f64(),
        });
        if out.qualified {
            debug_assert!(out.fidelity >= cfg.f_limit);
            mask = trial_mask;
            current = out;
            untriable.clear();
        } else {
            untriable.insert(edge);
        }
    }
    solution(&mask, &current, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::TargetState;

    #[test]
    fn impossible_target_on_complete_graph_fails() {
        // A two-vertex graph cannot produce a four-party state.
        let space =
            SearchSpace::for_state(2, 2, &[], DetectorModel::default(), None, true).unwrap();
        let t = Target::State(TargetState::ghz(4, 2).unwrap());
        assert!(matches!(
            theseus(
                &t,
                &space,
                &OptimizerConfig::default(),
                &PrunePolicy::default()
            ),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn bell_pair_prunes_to_two_edges() {
        let space =
            SearchSpace::for_state(2, 2, &[], DetectorModel::default(), None, true).unwrap();
        let t = Target::State(TargetState::bell(2).unwrap());
        let cfg = OptimizerConfig {
            seed: 1,
            ..Default::default()
        };
        let s = theseus(&t, &space, &cfg, &PrunePolicy::GreedyMinWeight).unwrap();
        assert!(s.qualified);
        assert_eq!(s.graph.edge_count(), 2);
        assert!(s.fidelity >= 0.95);
        let again = theseus(&t, &space, &cfg, &PrunePolicy::GreedyMinWeight).unwrap();
        assert_eq!(s.graph, again.graph);
    }
}
