//! Infidelity and count-rate scaling of an approximate GHZ graph as one class of edge
//! weights is turned down.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, EdgeKey};
use crate::objective::{fidelity, TargetState};
use crate::state::{event_probability, ConditioningSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub omega: f64,
    pub infidelity: f64,
    pub event_probability: f64,
}

/// Sets every edge in `small` to weight `ω` and records `1 − F` against `target` and the
/// post-selected event probability, for each `ω` in `omegas`.
pub fn scaling_study(
    g: &ColoredGraph,
    small: &[EdgeKey],
    target: &TargetState,
    omegas: &[f64],
) -> Result<Vec<ScalingRow>> {
    let idx: Vec<usize> = small
        .iter()
        .map(|k| {
            g.edge_index(k)
                .ok_or_else(|| Error::invalid(format!("edge {k} is not in the graph")))
        })
        .collect::<Result<_>>()?;
    let cond = ConditioningSpec::postselected(g);
    omegas
        .iter()
        .map(|&omega| {
            let mut w = g.weights();
            for &i in &idx {
                w[i] = Complex64::new(omega, 0.0);
            }
            let h = g.with_weights(&w)?;
            Ok(ScalingRow {
                omega,
                infidelity: 1.0 - fidelity(&h, target, &cond)?,
                event_probability: event_probability(&h, &cond)?,
            })
        })
        .collect()
}

/// The scaling study for six-party, three-dimensional GHZ.
pub fn ghz63_scaling_study(
    g: &ColoredGraph,
    small: &[EdgeKey],
    omegas: &[f64],
) -> Result<Vec<ScalingRow>> {
    scaling_study(g, small, &TargetState::ghz(6, 3)?, omegas)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
