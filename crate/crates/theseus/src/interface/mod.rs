//! Text formats: the target expression language, graph JSON and Graphviz output.

mod dot;
mod json;
mod parse;

pub use dot::{graph_to_dot, mode_color};
pub use json::{
    graph_from_any_json, graph_to_json, json_to_graph, solution_to_json, trace_to_jsonl,
};
pub use parse::{format_state, parse_state, parse_target};
