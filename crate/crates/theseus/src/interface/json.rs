use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::discovery::{Solution, TraceRecord};
use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Edge};

#[derive(Serialize)]
struct EdgeDoc {
    u: usize,
    v: usize,
    cu: usize,
    cv: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct GraphDoc {
    n: usize,
    d: usize,
    #[serde(rename = "virtual", skip_serializing_if = "is_zero")]
    n_virtual: usize,
    edges: Vec<EdgeDoc>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

fn graph_doc(g: &ColoredGraph) -> GraphDoc {
    GraphDoc {
        n: g.n_real(),
        d: g.d_modes(),
        n_virtual: g.n_virtual(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: e.u,
                v: e.v,
                cu: e.cu,
                cv: e.cv,
                re: e.weight.re,
                im: e.weight.im,
            })
            .collect(),
    }
}

/// Pretty-printed graph document. `virtual` is written only when the graph has
/// virtual vertices, which are numbered after the `n` real ones.
pub fn graph_to_json(g: &ColoredGraph) -> String {
    serde_json::to_string_pretty(&graph_doc(g)).expect("graph documents always serialize")
}

pub fn json_to_graph(text: &str) -> Result<ColoredGraph> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))?;
    graph_from_value(&doc, "$")
}

pub(crate) fn graph_from_value(doc: &Value, path: &str) -> Result<ColoredGraph> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !["n", "d", "virtual", "edges"].contains(&key.as_str()) {
            return Err(Error::schema(format!("{path}.{key}"), "unknown field"));
        }
    }
    let n = uint(obj, "n", path, true)?;
    let d = uint(obj, "d", path, true)?;
    let n_virtual = uint(obj, "virtual", path, false)?;
    let edges = obj
        .get("edges")
        .ok_or_else(|| Error::schema(format!("{path}.edges"), "missing field"))?
        .as_array()
        .ok_or_else(|| Error::schema(format!("{path}.edges"), "expected an array"))?;
    if d == 0 {
        return Err(Error::schema(format!("{path}.d"), "must be at least 1"));
    }

    let mut g = ColoredGraph::empty(n, n_virtual, d)?;
    for (i, e) in edges.iter().enumerate() {
        let at = format!("{path}.edges[{i}]");
        let eo = e
            .as_object()
            .ok_or_else(|| Error::schema(&at, "expected an object"))?;
        for key in eo.keys() {
            if !["u", "v", "cu", "cv", "re", "im"].contains(&key.as_str()) {
                return Err(Error::schema(format!("{at}.{key}"), "unknown field"));
            }
        }
        let edge = Edge::new(
            uint(eo, "u", &at, true)?,
            uint(eo, "v", &at, true)?,
            uint(eo, "cu", &at, true)?,
            uint(eo, "cv", &at, true)?,
            Complex64::new(float(eo, "re", &at)?, float(eo, "im", &at)?),
        )
        .map_err(|err| Error::schema(&at, err.to_string()))?;
        g = g
            .add_edge(edge)
            .map_err(|err| Error::schema(&at, err.to_string()))?;
    }
    Ok(g)
}

fn uint(obj: &Map<String, Value>, key: &str, path: &str, required: bool) -> Result<usize> {
    match obj.get(key) {
        None if !required => Ok(0),
        None => Err(Error::schema(format!("{path}.{key}"), "missing field")),
        Some(v) => v.as_u64().map(|x| x as usize).ok_or_else(|| {
            Error::schema(format!("{path}.{key}"), "expected a non-negative integer")
        }),
    }
}

fn float(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    obj.get(key)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "missing field"))?
        .as_f64()
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "expected a number"))
}

#[derive(Serialize)]
struct StepDoc {
    step: usize,
    edge: Option<[usize; 4]>,
    accepted: bool,
    fidelity: f64,
    loss: f64,
    restarts: usize,
    edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
}

fn step_doc(r: &TraceRecord, with_time: bool) -> StepDoc {
    StepDoc {
        step: r.step,
        edge: r.edge.map(|k| [k.u, k.v, k.cu, k.cv]),
        accepted: r.accepted,
        fidelity: r.fidelity,
        loss: r.loss,
        restarts: r.restarts,
        edges: r.edges,
        time: with_time.then_some(r.time),
    }
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    target: &'a str,
    qualified: bool,
    fidelity: f64,
    loss: f64,
    edge_count: usize,
    graph: GraphDoc,
    trace: Vec<StepDoc>,
}

/// Solution document. Timing is left out so that the same search always produces the
/// same bytes.
pub fn solution_to_json(sol: &Solution, target: &str) -> String {
    let doc = SolutionDoc {
        target,
        qualified: sol.qualified,
        fidelity: sol.fidelity,
        loss: sol.loss,
        edge_count: sol.graph.edge_count(),
        graph: graph_doc(&sol.graph),
        trace: sol.trace.iter().map(|r| step_doc(r, false)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("solution documents always serialize")
}

/// Reads the graph out of a solution document, or a bare graph document.
pub fn graph_from_any_json(text: &str) -> Result<ColoredGraph> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))?;
    match doc.get("graph") {
        Some(g) => graph_from_value(g, "$.graph"),
        None => graph_from_value(&doc, "$"),
    }
}

/// One JSON object per line, with timing.
pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in trace {
        out.push_str(&serde_json::to_string(&step_doc(r, true)).expect("serializable"));
        out.push('\n');
    }
    out
}
