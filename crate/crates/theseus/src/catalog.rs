//! Hand-built graphs with known behaviour, used as fixed points in tests and as
//! `export --builtin` sources.

use num_complex::Complex64;

use crate::fock::KetTerm;
use crate::graph::{ColoredGraph, Edge, EdgeKey};
use crate::objective::TargetState;
use crate::state::{ConditioningSpec, DetectorModel};

fn edge(u: usize, v: usize, cu: usize, cv: usize, w: f64) -> Edge {
    Edge::new(u, v, cu, cv, Complex64::new(w, 0.0)).expect("catalog edges are valid")
}

/// Four-vertex, four-edge cycle whose two perfect matchings give `|0000⟩ + |1111⟩`.
pub fn ghz4_cycle() -> ColoredGraph {
    ColoredGraph::from_edges(
        4,
        0,
        2,
        [
            edge(0, 1, 0, 0, 1.0),
            edge(2, 3, 0, 0, 1.0),
            edge(0, 2, 1, 1, 1.0),
            edge(1, 3, 1, 1, 1.0),
        ],
    )
    .expect("valid graph")
}

/// Edges of [`ghz63_scaling`] that carry the tunable weight.
pub fn ghz63_small_edges() -> Vec<EdgeKey> {
    [(0, 1, 0, 0), (2, 3, 1, 1), (4, 5, 2, 2)]
        .into_iter()
        .map(|(u, v, cu, cv)| EdgeKey::new(u, v, cu, cv).unwrap())
        .collect()
}

/// Six-vertex, three-color graph approximating GHZ(6,3).
///
/// Each wanted term `|iiiiii⟩` is one small edge times two unit edges, so it scales
/// with `ω`. The unit edges form two triangles and have no perfect matching among
/// themselves; the only unwanted term uses all three small edges and scales with `ω³`.
pub fn ghz63_scaling(omega: f64) -> ColoredGraph {
    let mut edges: Vec<Edge> = ghz63_small_edges()
        .into_iter()
        .map(|k| Edge::from_key(k, Complex64::new(omega, 0.0)))
        .collect();
    edges.extend([
        edge(2, 4, 0, 0, 1.0),
        edge(3, 5, 0, 0, 1.0),
        edge(0, 4, 1, 1, 1.0),
        edge(1, 5, 1, 1, 1.0),
        edge(0, 2, 2, 2, 1.0),
        edge(1, 3, 2, 2, 1.0),
    ]);
    ColoredGraph::from_edges(6, 0, 3, edges).expect("valid graph")
}

/// Herald vertices of [`heralded_bell3`].
pub const BELL3_HERALDS: [usize; 6] = [2, 3, 4, 5, 6, 7];

/// Heralded three-dimensional Bell source on outputs `a = 0`, `b = 1` and six single-mode
/// trigger paths `2..=7`.
///
/// Output edges carry weight `v`, trigger-trigger edges carry `±w`. The leading heralded
/// state is `2v²w²(|00⟩ − |11⟩ − |22⟩)`, and the signs on the trigger edges make the
/// three-pair event with all triggers firing and empty outputs cancel.
pub fn heralded_bell3(v: f64, w: f64) -> ColoredGraph {
    let mut edges = vec![
        edge(0, 2, 0, 0, v),
        edge(0, 3, 1, 0, v),
        edge(0, 4, 2, 0, v),
        edge(1, 5, 0, 0, v),
        edge(1, 6, 1, 0, v),
        edge(1, 7, 2, 0, v),
        edge(1, 6, 0, 0, v),
        edge(1, 7, 1, 0, v),
        edge(1, 5, 2, 0, v),
    ];
    for (p, q, s) in [
        (2, 5, 1.0),
        (3, 6, -1.0),
        (4, 7, -1.0),
        (2, 6, -1.0),
        (3, 7, 1.0),
        (4, 5, 1.0),
    ] {
        edges.push(edge(p, q, 0, 0, s * w));
    }
    ColoredGraph::from_edges(8, 0, 3, edges).expect("valid graph")
}

/// `(|00⟩ − |11⟩ − |22⟩)/√3`, the phase pattern produced by [`heralded_bell3`].
pub fn heralded_bell3_target() -> TargetState {
    TargetState::new(
        [(0, 1.0), (1, -1.0), (2, -1.0)]
            .map(|(i, s)| (KetTerm::new(vec![i, i]), Complex64::new(s, 0.0))),
    )
    .expect("nonzero target")
}

pub fn heralded_bell3_conditioning(
    g: &ColoredGraph,
    detector: DetectorModel,
    max_pairs: usize,
) -> ConditioningSpec {
    ConditioningSpec::heralded(g, &BELL3_HERALDS, detector, Some(max_pairs))
}

/// Two-qubit CNOT with control input on virtual vertex 4 and target input on 5.
///
/// Outputs are vertices 0 (control) and 1 (target); vertices 2 and 3 are single-mode
/// heralds. For control 1 a two-edge branch between the outputs is active, and the
/// `−1` edge from the control input cancels the unflipped term against it.
pub fn cnot() -> (ColoredGraph, ConditioningSpec) {
    let g = ColoredGraph::from_edges(
        4,
        2,
        2,
        [
            edge(4, 0, 0, 0, 1.0),
            edge(4, 0, 1, 1, -1.0),
            edge(4, 2, 1, 0, 1.0),
            edge(4, 3, 1, 0, 1.0),
            edge(5, 2, 0, 0, 1.0),
            edge(5, 3, 1, 0, 1.0),
            edge(1, 3, 0, 0, 1.0),
            edge(1, 2, 1, 0, 1.0),
            edge(0, 1, 1, 1, 1.0),
            edge(0, 1, 1, 0, 1.0),
        ],
    )
    .expect("valid graph");
    let cond = ConditioningSpec::heralded(&g, &[2, 3], DetectorModel::NumberResolvingOne, None)
        .with_postselected_outputs(true);
    (g, cond)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["ghz4", "ghz63", "bell3-heralded", "cnot"];

/// Looks up a catalog graph by name, at its reference weights.
pub fn builtin(name: &str) -> Option<ColoredGraph> {
    match name {
        "ghz4" => Some(ghz4_cycle()),
        "ghz63" => Some(ghz63_scaling(0.5)),
        "bell3-heralded" => Some(heralded_bell3(0.16, 0.07)),
        "cnot" => Some(cnot().0),
        _ => None,
    }
}
