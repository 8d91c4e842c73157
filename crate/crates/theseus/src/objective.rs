use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::KetTerm;
use crate::graph::ColoredGraph;
use crate::model::AmplitudeModel;
use crate::state::ConditioningSpec;

/// A normalized superposition of kets.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetState {
    parties: usize,
    terms: BTreeMap<KetTerm, Complex64>,
}

impl TargetState {
    /// Normalizes the given terms. Repeated kets add up.
    pub fn new(terms: impl IntoIterator<Item = (KetTerm, Complex64)>) -> Result<Self> {
        let mut map: BTreeMap<KetTerm, Complex64> = BTreeMap::new();
        let mut parties = None;
        for (k, c) in terms {
            match parties {
                None => parties = Some(k.len()),
                Some(p) if p != k.len() => {
                    return Err(Error::InvalidTarget(format!(
                        "ket {k} has {} parties, expected {p}",
                        k.len()
                    )))
                }
                _ => {}
            }
            *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| c.norm() > 0.0);
        let norm = map.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidTarget("target has zero norm".into()));
        }
        for c in map.values_mut() {
            *c /= norm;
        }
        Ok(TargetState {
            parties: parties.unwrap_or(0),
            terms: map,
        })
    }

    /// `(1/√d) Σ_i |i, i, …, i⟩` on `n` parties.
    pub fn ghz(n: usize, d: usize) -> Result<Self> {
        if n < 2 || d < 1 {
            return Err(Error::InvalidTarget(format!(
                "ghz needs n >= 2 and d >= 1 (got {n}, {d})"
            )));
        }
        TargetState::new((0..d).map(|i| (KetTerm::new(vec![i; n]), Complex64::new(1.0, 0.0))))
    }

    pub fn bell(d: usize) -> Result<Self> {
        TargetState::ghz(2, d)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn terms(&self) -> &BTreeMap<KetTerm, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, ket: &KetTerm) -> Complex64 {
        self.terms
            .get(ket)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest mode index used plus one.
    pub fn local_dimension(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|k| k.modes.iter().copied())
            .max()
            .map_or(1, |m| m + 1)
    }
}

/// A truth table: one target output per input assignment of the virtual vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetGate {
    input_basis: Vec<Vec<usize>>,
    outputs: Vec<TargetState>,
}

impl TargetGate {
    pub fn new(input_basis: Vec<Vec<usize>>, outputs: Vec<TargetState>) -> Result<Self> {
        if input_basis.is_empty() || input_basis.len() != outputs.len() {
            return Err(Error::InvalidTarget(
                "a gate needs one target output per input".into(),
            ));
        }
        let mut sorted = input_basis.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != input_basis.len() {
            return Err(Error::InvalidTarget("gate inputs must be distinct".into()));
        }
        let width = input_basis[0].len();
        if input_basis.iter().any(|i| i.len() != width) {
            return Err(Error::InvalidTarget(
                "every gate input must assign the same number of modes".into(),
            ));
        }
        let parties = outputs[0].parties();
        if outputs.iter().any(|o| o.parties() != parties) {
            return Err(Error::InvalidTarget(
                "every gate output must have the same number of parties".into(),
            ));
        }
        Ok(TargetGate {
            input_basis,
            outputs,
        })
    }

    /// Controlled shift: `|c, t⟩ → |c, (t + c) mod d_t⟩`. For two qubits this is CNOT.
    pub fn cnot(d_control: usize, d_target: usize) -> Result<Self> {
        if d_control < 2 || d_target < 2 {
            return Err(Error::InvalidTarget(format!(
                "cnot needs dimensions >= 2 (got {d_control}, {d_target})"
            )));
        }
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for c in 0..d_control {
            for t in 0..d_target {
                inputs.push(vec![c, t]);
                outputs.push(TargetState::new([(
                    KetTerm::new(vec![c, (t + c) % d_target]),
                    Complex64::new(1.0, 0.0),
                )])?);
            }
        }
        TargetGate::new(inputs, outputs)
    }

    pub fn input_basis(&self) -> &[Vec<usize>] {
        &self.input_basis
    }

    pub fn outputs(&self) -> &[TargetState] {
        &self.outputs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    State(TargetState),
    Gate(TargetGate),
}

impl Target {
    pub fn parties(&self) -> usize {
        match self {
            Target::State(s) => s.parties(),
            Target::Gate(g) => g.outputs()[0].parties(),
        }
    }

    pub fn inputs(&self) -> &[Vec<usize>] {
        match self {
            Target::State(_) => &[],
            Target::Gate(g) => g.input_basis(),
        }
    }

    fn output_for(&self, input: usize) -> &TargetState {
        match self {
            Target::State(s) => s,
            Target::Gate(g) => &g.outputs()[input],
        }
    }
}

impl From<TargetState> for Target {
    fn from(s: TargetState) -> Self {
        Target::State(s)
    }
}

impl From<TargetGate> for Target {
    fn from(g: TargetGate) -> Self {
        Target::Gate(g)
    }
}

/// How the sparsity penalty measures a complex weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Norm {
    /// `|Re ω| + |Im ω|` per edge.
    #[default]
    Componentwise,
    /// `|ω|` per edge.
    Modulus,
}

/// Fidelity and loss of one target against one compiled topology, as functions of the
/// flat real weight vector.
#[derive(Clone, Debug)]
pub struct Objective {
    model: AmplitudeModel,
    target: Target,
    outputs: Vec<usize>,
    alpha: f64,
    l1: L1Norm,
    branch: Vec<usize>,
    n_branches: usize,
    target_conj: Vec<Complex64>,
}

impl Objective {
    pub fn new(
        g: &ColoredGraph,
        target: &Target,
        cond: &ConditioningSpec,
        alpha: f64,
        l1: L1Norm,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if target.parties() != cond.output_vertices.len() {
            return Err(Error::InvalidTarget(format!(
                "target has {} parties but the conditioning keeps {} output vertices",
                target.parties(),
                cond.output_vertices.len()
            )));
        }
        if let Target::Gate(gate) = target {
            if gate.input_basis()[0].len() != g.n_virtual() {
                return Err(Error::InvalidTarget(format!(
                    "gate inputs assign {} modes but the graph has {} virtual vertices",
                    gate.input_basis()[0].len(),
                    g.n_virtual()
                )));
            }
        }
        let model = AmplitudeModel::build(g, cond, target.inputs())?;
        Ok(Objective::from_model(
            model,
            target.clone(),
            cond.output_vertices.clone(),
            alpha,
            l1,
        ))
    }

    fn from_model(
        model: AmplitudeModel,
        target: Target,
        outputs: Vec<usize>,
        alpha: f64,
        l1: L1Norm,
    ) -> Self {
        let mut ids = BTreeMap::new();
        let mut branch = Vec::with_capacity(model.slots().len());
        let mut target_conj = Vec::with_capacity(model.slots().len());
        for slot in model.slots() {
            let next = ids.len();
            branch.push(*ids.entry(slot.herald.clone()).or_insert(next));
            let c = slot
                .output
                .as_ket(&outputs)
                .map(|k| target.output_for(slot.input).coefficient(&k))
                .unwrap_or_default();
            target_conj.push(c.conj());
        }
        Objective {
            model,
            target,
            outputs,
            alpha,
            l1,
            n_branches: ids.len(),
            branch,
            target_conj,
        }
    }

    /// The objective on the subgraph keeping edges where `keep[e]` is true.
    pub fn restrict(&self, keep: &[bool]) -> Objective {
        Objective::from_model(
            self.model.restrict(keep),
            self.target.clone(),
            self.outputs.clone(),
            self.alpha,
            self.l1,
        )
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn n_params(&self) -> usize {
        2 * self.model.n_edges()
    }

    pub fn model(&self) -> &AmplitudeModel {
        &self.model
    }

    fn weights(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(
            x.len(),
            self.n_params(),
            "parameter vector has wrong length"
        );
        x.chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect()
    }

    fn overlaps(&self, amps: &[Complex64]) -> (Vec<Complex64>, f64) {
        let mut s = vec![Complex64::new(0.0, 0.0); self.n_branches];
        let mut d = 0.0;
        for (j, a) in amps.iter().enumerate() {
            s[self.branch[j]] += self.target_conj[j] * a;
            d += a.norm_sqr();
        }
        (s, d)
    }

    fn k(&self) -> f64 {
        self.model.n_inputs() as f64
    }

    /// Branch-incoherent fidelity; for gates the overlaps of all inputs add coherently.
    pub fn fidelity(&self, x: &[f64]) -> Result<f64> {
        let amps = self.model.amplitudes(&self.weights(x));
        let (s, d) = self.overlaps(&amps);
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::UndefinedFidelity);
        }
        Ok(s.iter().map(|z| z.norm_sqr()).sum::<f64>() / (self.k() * d))
    }

    /// Sum of squared conditioned amplitudes over all inputs.
    pub fn event_probability(&self, x: &[f64]) -> f64 {
        let amps = self.model.amplitudes(&self.weights(x));
        amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn l1_penalty(&self, x: &[f64]) -> f64 {
        match self.l1 {
            L1Norm::Componentwise => x.iter().map(|v| v.abs()).sum(),
            L1Norm::Modulus => x.chunks_exact(2).map(|c| c[0].hypot(c[1])).sum(),
        }
    }

    pub fn loss(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 - self.fidelity(x)? + self.alpha * self.l1_penalty(x))
    }

    /// Loss and its gradient with respect to `(Re ω_e, Im ω_e)`.
    pub fn loss_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.weights(x);
        let amps = self.model.amplitudes(&w);
        let (s, d) = self.overlaps(&amps);
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::UndefinedFidelity);
        }
        let k = self.k();
        let f = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / (k * d);

        // dF/dω_e = Σ_j λ_j ∂A_j/∂ω_e, with A_j holomorphic in ω.
        let mut g = vec![Complex64::new(0.0, 0.0); w.len()];
        for (j, slot) in self.model.slots().iter().enumerate() {
            let lambda =
                (s[self.branch[j]].conj() * self.target_conj[j] - f * k * amps[j].conj()) / (k * d);
            if lambda == Complex64::new(0.0, 0.0) {
                continue;
            }
            for m in &slot.monomials {
                for (i, &(e, p)) in m.factors.iter().enumerate() {
                    let mut dv = Complex64::new(m.coeff * f64::from(p), 0.0) * w[e].powu(p - 1);
                    for (i2, &(e2, p2)) in m.factors.iter().enumerate() {
                        if i2 != i {
                            dv *= w[e2].powu(p2);
                        }
                    }
                    g[e] += lambda * dv;
                }
            }
        }

        let mut grad = Vec::with_capacity(x.len());
        for (ge, c) in g.iter().zip(x.chunks_exact(2)) {
            let (pr, pi) = match self.l1 {
                L1Norm::Componentwise => (sign(c[0]), sign(c[1])),
                L1Norm::Modulus => {
                    let r = c[0].hypot(c[1]);
                    if r == 0.0 {
                        (0.0, 0.0)
                    } else {
                        (c[0] / r, c[1] / r)
                    }
                }
            };
            grad.push(-2.0 * ge.re + self.alpha * pr);
            grad.push(2.0 * ge.im + self.alpha * pi);
        }
        let loss = 1.0 - f + self.alpha * self.l1_penalty(x);
        Ok((loss, grad))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fidelity of the graph's conditioned state with a target state.
pub fn fidelity(g: &ColoredGraph, t: &TargetState, c: &ConditioningSpec) -> Result<f64> {
    let obj = Objective::new(g, &Target::State(t.clone()), c, 0.0, L1Norm::default())?;
    obj.fidelity(&g.weights_flat())
}

/// Coherent-average gate fidelity over the gate's input basis.
pub fn gate_fidelity(g: &ColoredGraph, t: &TargetGate, c: &ConditioningSpec) -> Result<f64> {
    let obj = Objective::new(g, &Target::Gate(t.clone()), c, 0.0, L1Norm::default())?;
    obj.fidelity(&g.weights_flat())
}

/// `(1 − F) + α·Σ_e (|Re ω_e| + |Im ω_e|)`.
pub fn loss(g: &ColoredGraph, t: &Target, c: &ConditioningSpec, alpha: f64) -> Result<f64> {
    Objective::new(g, t, c, alpha, L1Norm::default())?.loss(&g.weights_flat())
}

pub fn loss_gradient(
    g: &ColoredGraph,
    t: &Target,
    c: &ConditioningSpec,
    alpha: f64,
) -> Result<Vec<f64>> {
    Ok(Objective::new(g, t, c, alpha, L1Norm::default())?
        .loss_and_gradient(&g.weights_flat())?
        .1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::Edge;
    use approx::assert_abs_diff_eq;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ghz_cycle_has_unit_fidelity() {
        let g = catalog::ghz4_cycle();
        let f = fidelity(
            &g,
            &TargetState::ghz(4, 2).unwrap(),
            &ConditioningSpec::postselected(&g),
        )
        .unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_target_has_zero_fidelity() {
        let g = ColoredGraph::from_edges(2, 0, 2, [Edge::new(0, 1, 0, 0, cx(1.0, 0.0)).unwrap()])
            .unwrap();
        let t = TargetState::new([(KetTerm::new(vec![1, 1]), cx(1.0, 0.0))]).unwrap();
        assert_eq!(
            fidelity(&g, &t, &ConditioningSpec::postselected(&g)).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_graph_fidelity_is_undefined() {
        let g = ColoredGraph::complete(4, 2).unwrap();
        let r = fidelity(
            &g,
            &TargetState::ghz(4, 2).unwrap(),
            &ConditioningSpec::postselected(&g),
        );
        assert!(matches!(r, Err(Error::UndefinedFidelity)));
    }

    #[test]
    fn loss_arithmetic() {
        let g = ColoredGraph::from_edges(
            4,
            0,
            1,
            [
                Edge::new(0, 1, 0, 0, cx(1.0, 0.0)).unwrap(),
                Edge::new(2, 3, 0, 0, cx(1.0, 0.0)).unwrap(),
            ],
        )
        .unwrap();
        let t =
            Target::State(TargetState::new([(KetTerm::new(vec![0; 4]), cx(1.0, 0.0))]).unwrap());
        let c = ConditioningSpec::postselected(&g);
        assert_abs_diff_eq!(loss(&g, &t, &c, 0.1).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(loss(&g, &t, &c, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_gradient_vanishes_without_penalty() {
        let g = ColoredGraph::from_edges(2, 0, 1, [Edge::new(0, 1, 0, 0, cx(0.3, -0.7)).unwrap()])
            .unwrap();
        let t = Target::State(TargetState::bell(1).unwrap());
        let grad = loss_gradient(&g, &t, &ConditioningSpec::postselected(&g), 0.0).unwrap();
        assert!(grad.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn penalty_gradient_is_sign() {
        let g = ColoredGraph::from_edges(2, 0, 1, [Edge::new(0, 1, 0, 0, cx(1.0, 1.0)).unwrap()])
            .unwrap();
        let t = Target::State(TargetState::bell(1).unwrap());
        let grad = loss_gradient(&g, &t, &ConditioningSpec::postselected(&g), 0.25).unwrap();
        assert_abs_diff_eq!(grad[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(grad[1], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn modulus_penalty() {
        let g = ColoredGraph::from_edges(2, 0, 1, [Edge::new(0, 1, 0, 0, cx(3.0, 4.0)).unwrap()])
            .unwrap();
        let t = Target::State(TargetState::bell(1).unwrap());
        let obj = Objective::new(
            &g,
            &t,
            &ConditioningSpec::postselected(&g),
            0.5,
            L1Norm::Modulus,
        )
        .unwrap();
        let x = g.weights_flat();
        assert_abs_diff_eq!(obj.loss(&x).unwrap(), 2.5, epsilon = 1e-12);
        let (_, grad) = obj.loss_and_gradient(&x).unwrap();
        assert_abs_diff_eq!(grad[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(grad[1], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn target_validation() {
        assert!(TargetState::new([
            (KetTerm::new(vec![0, 0]), cx(1.0, 0.0)),
            (KetTerm::new(vec![1]), cx(1.0, 0.0)),
        ])
        .is_err());
        assert!(TargetState::new([(KetTerm::new(vec![0, 0]), cx(0.0, 0.0))]).is_err());
        let t = TargetState::ghz(3, 3).unwrap();
        assert_eq!(t.terms().len(), 3);
        assert_abs_diff_eq!(
            t.coefficient(&KetTerm::new(vec![2; 3])).re,
            1.0 / 3f64.sqrt()
        );
    }

    #[test]
    fn cnot_truth_table() {
        let g = TargetGate::cnot(2, 2).unwrap();
        assert_eq!(
            g.input_basis(),
            &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let flipped = &g.outputs()[2];
        assert_eq!(flipped.coefficient(&KetTerm::new(vec![1, 1])), cx(1.0, 0.0));
        assert!(TargetGate::new(
            vec![vec![0], vec![0]],
            vec![flipped.clone(), flipped.clone()]
        )
        .is_err());
    }

    #[test]
    fn cnot_catalog_graph_is_exact() {
        let (g, cond) = catalog::cnot();
        let f = gate_fidelity(&g, &TargetGate::cnot(2, 2).unwrap(), &cond).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_wiring_is_identity_gate() {
        let w = cx(1.0, 0.0);
        let g = ColoredGraph::from_edges(
            2,
            2,
            2,
            (0..2).flat_map(|m| {
                [
                    Edge::new(2, 0, m, m, w).unwrap(),
                    Edge::new(3, 1, m, m, w).unwrap(),
                ]
            }),
        )
        .unwrap();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                inputs.push(vec![a, b]);
                outputs.push(TargetState::new([(KetTerm::new(vec![a, b]), w)]).unwrap());
            }
        }
        let gate = TargetGate::new(inputs, outputs).unwrap();
        let f = gate_fidelity(&g, &gate, &ConditioningSpec::postselected(&g)).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }
}
