//! Reference implementations that share no code with the library: a brute-force
//! expansion of the pair-creation polynomial and a direct creation-operator simulation.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use theseus::{ColoredGraph, Edge, FockOccupation, FockState, KetTerm};

pub const FLOOR: f64 = 1e-14;

/// Random subgraph of the complete graph on `n` vertices with `d` modes. Each edge
/// survives with probability `p`; weights are uniform in the unit square.
pub fn random_graph(rng: &mut impl Rng, n: usize, d: usize, p: f64) -> ColoredGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            for cu in 0..d {
                for cv in 0..d {
                    if rng.gen_bool(p) {
                        let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        edges.push(Edge::new(u, v, cu, cv, w).unwrap());
                    }
                }
            }
        }
    }
    ColoredGraph::from_edges(n, 0, d, edges).unwrap()
}

/// Expands `(Σ_e ω_e a†_u a†_v)^N / N!` with `N = n/2` by enumerating every ordered
/// sequence of `N` edges, and keeps the terms that put one photon in each path.
pub fn multinomial_postselected(g: &ColoredGraph) -> BTreeMap<KetTerm, Complex64> {
    let n = g.n_real();
    let pairs = n / 2;
    let edges = g.edges();
    let mut out: BTreeMap<KetTerm, Complex64> = BTreeMap::new();
    let mut seq = vec![0usize; pairs];
    let total = edges.len().pow(pairs as u32);
    let fact: f64 = (1..=pairs).map(|k| k as f64).product();
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % edges.len();
            c /= edges.len();
        }
        let mut modes = vec![usize::MAX; n];
        let mut ok = true;
        let mut amp = Complex64::new(1.0, 0.0);
        for &i in &seq {
            let e = edges[i];
            if modes[e.u] != usize::MAX || modes[e.v] != usize::MAX {
                ok = false;
                break;
            }
            modes[e.u] = e.cu;
            modes[e.v] = e.cv;
            amp *= e.weight;
        }
        if ok {
            *out.entry(KetTerm::new(modes)).or_default() += amp / fact;
        }
    }
    out.retain(|_, a| a.norm() > FLOOR);
    out
}

/// `Σ_{k≤K} H^k |0⟩ / k!` with `H = Σ_e ω_e a†_{u,cu} a†_{v,cv}`, acting on occupation
/// vectors indexed by `vertex · d + mode`.
pub fn operator_expansion(g: &ColoredGraph, max_pairs: usize) -> BTreeMap<Vec<u32>, Complex64> {
    let d = g.d_modes();
    let slots = g.n_vertices() * d;
    let create = |state: &BTreeMap<Vec<u32>, Complex64>| {
        let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (occ, a) in state {
            for e in g.edges() {
                let (i, j) = (e.u * d + e.cu, e.v * d + e.cv);
                let mut o = occ.clone();
                let mut f = ((o[i] + 1) as f64).sqrt();
                o[i] += 1;
                f *= ((o[j] + 1) as f64).sqrt();
                o[j] += 1;
                *next.entry(o).or_default() += a * e.weight * f;
            }
        }
        next
    };
    let mut term: BTreeMap<Vec<u32>, Complex64> =
        [(vec![0u32; slots], Complex64::new(1.0, 0.0))].into();
    let mut total = term.clone();
    for k in 1..=max_pairs {
        term = create(&term)
            .into_iter()
            .map(|(o, a)| (o, a / k as f64))
            .collect();
        for (o, a) in &term {
            *total.entry(o.clone()).or_default() += a;
        }
    }
    total.retain(|_, a| a.norm() > FLOOR);
    total
}

/// Flattens a library Fock state into the oracle's occupation-vector form.
pub fn to_vectors(s: &FockState, n_vertices: usize, d: usize) -> BTreeMap<Vec<u32>, Complex64> {
    s.iter()
        .map(|(occ, a)| (occupation_vector(occ, n_vertices, d), *a))
        .collect()
}

fn occupation_vector(occ: &FockOccupation, n_vertices: usize, d: usize) -> Vec<u32> {
    let mut v = vec![0u32; n_vertices * d];
    for &(vertex, mode, count) in occ.entries() {
        v[vertex * d + mode] = count;
    }
    v
}

/// Largest absolute difference between two sparse amplitude maps.
pub fn max_deviation<K: Ord + Clone>(
    a: &BTreeMap<K, Complex64>,
    b: &BTreeMap<K, Complex64>,
) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| {
            let x = a.get(k).copied().unwrap_or_default();
            let y = b.get(k).copied().unwrap_or_default();
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

/// Central finite-difference gradient.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
