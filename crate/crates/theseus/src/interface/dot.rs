use std::fmt::Write;

use num_complex::Complex64;

use crate::graph::ColoredGraph;

const PALETTE: [&str; 10] = [
    "blue", "red", "green", "orange", "purple", "brown", "magenta", "cyan", "gold", "gray40",
];

/// Color for mode `m`. Modes past the end of the palette wrap around, skipping the
/// first three entries so that modes 0 to 2 keep colors of their own.
pub fn mode_color(m: usize) -> &'static str {
    if m < PALETTE.len() {
        PALETTE[m]
    } else {
        PALETTE[3 + (m - 3) % (PALETTE.len() - 3)]
    }
}

fn vertex_label(g: &ColoredGraph, v: usize) -> String {
    if g.is_virtual(v) {
        format!("V{}", v - g.n_real())
    } else if v < 26 {
        char::from(b'a' + v as u8).to_string()
    } else {
        format!("v{v}")
    }
}

fn weight_label(w: Complex64) -> String {
    let r = |x: f64| {
        let v = (x * 1000.0).round() / 1000.0;
        if v == 0.0 {
            0.0
        } else {
            v
        }
    };
    let (re, im) = (r(w.re), r(w.im));
    if im == 0.0 {
        format!("{re:.3}")
    } else if re == 0.0 {
        format!("{im:.3}i")
    } else {
        format!(
            "{re:.3}{}{:.3}i",
            if im < 0.0 { '-' } else { '+' },
            im.abs()
        )
    }
}

/// Graphviz rendering. Edges whose weight has a negative real part are dashed, and an
/// edge with different colors at its two ends is drawn half in each.
pub fn graph_to_dot(g: &ColoredGraph) -> String {
    let mut out = String::from("graph G {\n  node [shape=circle];\n");
    for v in 0..g.n_vertices() {
        let shape = if g.is_virtual(v) { ", shape=box" } else { "" };
        writeln!(out, "  {v} [label=\"{}\"{shape}];", vertex_label(g, v)).unwrap();
    }
    for e in g.edges() {
        let color = if e.cu == e.cv {
            mode_color(e.cu).to_string()
        } else {
            format!("{};0.5:{}", mode_color(e.cu), mode_color(e.cv))
        };
        let style = if e.weight.re < 0.0 {
            ", style=dashed"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} -- {} [color=\"{color}\", label=\"{}\"{style}];",
            e.u,
            e.v,
            weight_label(e.weight)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
