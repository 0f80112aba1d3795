//! Numerical synthesis of LRU gate sequences.
//!
//! A [`SequenceTemplate`] fixes the gate kinds and their order; some angles
//! are free parameters. [`optimize`] minimizes the truth-table [`cost`] with
//! Nelder–Mead from seeded uniform starts and keeps every distinct zero.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::gates::{reduce_angle, Dqd, GateDescriptor, PairRotation};
use crate::lru::{assemble, build_target, verify, LruKind, LruTruthTable, LruVerdict};
use crate::optim::{minimize, NelderMeadOptions};
use crate::spin::C64;

/// Largest number of free parameters a template may have.
pub const MAX_FREE_PARAMS: usize = 16;
/// Default success threshold on the cost.
pub const DEFAULT_SEARCH_TOL: f64 = 1e-8;
/// Parameter vectors closer than this (max-norm, after reduction) are one solution.
pub const MERGE_DISTANCE: f64 = 1e-6;

/// An angle of a template slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    Fixed(f64),
    /// Index into the parameter vector.
    Param(usize),
}

impl Angle {
    fn value(self, params: &[f64]) -> f64 {
        match self {
            Angle::Fixed(v) => v,
            Angle::Param(i) => params[i],
        }
    }

    fn is_zero(self) -> bool {
        matches!(self, Angle::Fixed(v) if v == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Slot {
    Phase { dqd: Dqd, phi: Angle },
    Exchange { dqd: Dqd, phi: Angle },
    Entangle { phi: Angle, psi: Angle },
}

impl Slot {
    fn angles(&self) -> Vec<Angle> {
        match *self {
            Slot::Phase { phi, .. } | Slot::Exchange { phi, .. } => vec![phi],
            Slot::Entangle { phi, psi } => vec![phi, psi],
        }
    }

    fn descriptor(&self, params: &[f64]) -> GateDescriptor {
        match *self {
            Slot::Phase { dqd, phi } => GateDescriptor::Phase { dqd, phi: phi.value(params) },
            Slot::Exchange { dqd, phi } => GateDescriptor::Exchange { dqd, phi: phi.value(params) },
            Slot::Entangle { phi, psi } => GateDescriptor::Entangle { phi: phi.value(params), psi: psi.value(params) },
        }
    }
}

/// Ordered, partly parameterized gate list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTemplate {
    pub id: String,
    pub description: String,
    pub slots: Vec<Slot>,
    /// Whether entangling slots may carry a nonzero gradient angle ψ.
    pub gradient_allowed: bool,
}

impl SequenceTemplate {
    pub fn new(id: &str, description: &str, slots: Vec<Slot>, gradient_allowed: bool) -> Result<Self> {
        let t = Self { id: id.into(), description: description.into(), slots, gradient_allowed };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTemplate(format!("{}: {m}", self.id)));
        if self.n_entangling() == 0 {
            return bad("needs at least one entangling slot".into());
        }
        if !self.gradient_allowed {
            for s in &self.slots {
                if let Slot::Entangle { psi, .. } = s {
                    if !psi.is_zero() {
                        return bad("gradient-free template has an entangling slot with ψ ≠ 0".into());
                    }
                }
            }
        }
        let n = self.n_free();
        if n > MAX_FREE_PARAMS {
            return bad(format!("{n} free parameters exceed {MAX_FREE_PARAMS}"));
        }
        let mut used = vec![false; n];
        for a in self.slots.iter().flat_map(Slot::angles) {
            match a {
                Angle::Param(i) => used[i] = true,
                Angle::Fixed(v) if !v.is_finite() => return bad("non-finite fixed angle".into()),
                Angle::Fixed(_) => {}
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return bad(format!("parameter {i} is never used"));
        }
        Ok(())
    }

    pub fn n_free(&self) -> usize {
        self.slots
            .iter()
            .flat_map(Slot::angles)
            .filter_map(|a| match a {
                Angle::Param(i) => Some(i + 1),
                Angle::Fixed(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn n_entangling(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Entangle { .. })).count()
    }

    /// Number of gate slots.
    pub fn n_gates(&self) -> usize {
        self.slots.len()
    }

    /// Number of time steps when gates on different pairs run in parallel
    /// (as-soon-as-possible layering; entangling gates touch both pairs).
    pub fn n_steps(&self) -> usize {
        let (mut d, mut a) = (0usize, 0usize);
        for s in &self.slots {
            match *s {
                Slot::Phase { dqd: Dqd::D, .. } | Slot::Exchange { dqd: Dqd::D, .. } => d += 1,
                Slot::Phase { dqd: Dqd::A, .. } | Slot::Exchange { dqd: Dqd::A, .. } => a += 1,
                Slot::Entangle { .. } => {
                    d = d.max(a) + 1;
                    a = d;
                }
            }
        }
        d.max(a)
    }

    fn check_arity(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_free() {
            return Err(Error::Arity { expected: self.n_free(), got: params.len() });
        }
        Ok(())
    }

    pub fn instantiate(&self, params: &[f64]) -> Result<Vec<GateDescriptor>> {
        self.check_arity(params)?;
        Ok(self.slots.iter().map(|s| s.descriptor(params)).collect())
    }

    /// Whether shifting parameter `i` by one leaves every gate unchanged.
    pub fn is_periodic(&self, i: usize) -> bool {
        self.slots.iter().all(|s| match *s {
            Slot::Phase { .. } | Slot::Exchange { .. } => true,
            Slot::Entangle { phi, psi } => {
                let uses_phi = phi == Angle::Param(i);
                let uses_psi = psi == Angle::Param(i);
                (!uses_phi || psi.is_zero()) && (!uses_psi || phi.is_zero())
            }
        })
    }

    fn rotations(&self, params: &[f64]) -> Vec<PairRotation> {
        self.slots
            .iter()
            .map(|s| s.descriptor(params).pair_rotation().expect("template gates are pair rotations"))
            .collect()
    }
}

/// Precomputed inputs and targets for fast cost evaluation.
#[derive(Clone, Debug)]
pub struct CostModel {
    table: LruTruthTable,
    inputs: [[C64; 16]; 4],
}

impl CostModel {
    pub fn new(kind: LruKind) -> Self {
        let table = build_target(kind);
        let inputs = table.inputs().map(|s| {
            let mut a = [C64::new(0.0, 0.0); 16];
            a.iter_mut().zip(s.amplitudes().iter()).for_each(|(d, s)| *d = *s);
            a
        });
        Self { table, inputs }
    }

    pub fn kind(&self) -> LruKind {
        self.table.kind
    }

    /// Cost of a template at `params`; propagates only the four inputs.
    pub fn evaluate(&self, template: &SequenceTemplate, params: &[f64]) -> f64 {
        let rotations = template.rotations(params);
        let mut states = self.inputs;
        for r in &rotations {
            for s in states.iter_mut() {
                r.apply(s);
            }
        }
        let outputs = states.map(|s| crate::spin::Vector::from_iterator(16, s));
        self.table.score(&outputs).cost()
    }
}

/// `1 − (F_c + F_+ + F_−)/3` of the sequence `template(params)` against `target`.
pub fn cost(params: &[f64], template: &SequenceTemplate, target: LruKind) -> Result<f64> {
    template.check_arity(params)?;
    Ok(CostModel::new(target).evaluate(template, params))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub template: String,
    pub params: Vec<f64>,
    pub cost: f64,
    pub verdict: LruVerdict,
}

impl SolutionSet {
    pub fn sequence(&self, template: &SequenceTemplate) -> Result<Vec<GateDescriptor>> {
        template.instantiate(&self.params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub execution: Execution,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 100,
            seed: 7,
            tol: DEFAULT_SEARCH_TOL,
            execution: Execution::Parallel,
            nelder_mead: NelderMeadOptions {
                initial_step: 0.1,
                ftol: 1e-18,
                xtol: 1e-13,
                max_evals: 30_000,
                max_restarts: 8,
                target: 1e-16,
            },
        }
    }
}

/// Independent RNG stream of restart `index`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Outcome of one restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub cost: f64,
    pub evals: usize,
}

/// Runs a single seeded restart.
pub fn run_restart(template: &SequenceTemplate, model: &CostModel, opts: &SearchOptions, index: usize) -> RestartOutcome {
    let mut rng = restart_rng(opts.seed, index);
    let start: Vec<f64> = (0..template.n_free()).map(|_| rng.random::<f64>()).collect();
    let m = minimize(|x| model.evaluate(template, x), &start, &opts.nelder_mead);
    RestartOutcome { start, params: m.x, cost: m.value, evals: m.evals }
}

/// Searches `template` for zeros of the cost; returns canonical, distinct solutions.
pub fn optimize(template: &SequenceTemplate, target: LruKind, opts: &SearchOptions) -> Result<Vec<SolutionSet>> {
    template.validate()?;
    let model = CostModel::new(target);
    let outcomes = map_indexed(opts.restarts, opts.execution, |i| run_restart(template, &model, opts, i));
    let mut found = Vec::new();
    for o in outcomes.into_iter().filter(|o| o.cost < opts.tol) {
        let params = canonical_params(template, &o.params);
        let seq = template.instantiate(&params)?;
        let verdict = verify(&assemble(&seq), target, opts.tol)?;
        if verdict.pass {
            found.push(SolutionSet { template: template.id.clone(), params, cost: o.cost, verdict });
        }
    }
    Ok(merge_solutions(template, found))
}

/// Reduces every angle into [0, 1).
pub fn canonicalize_values(params: &[f64]) -> Vec<f64> {
    params.iter().map(|&p| reduce_angle(p)).collect()
}

fn canonical_params(template: &SequenceTemplate, params: &[f64]) -> Vec<f64> {
    params
        .iter()
        .enumerate()
        .map(|(i, &p)| if template.is_periodic(i) { reduce_angle(p) } else { p })
        .collect()
}

fn param_distance(template: &SequenceTemplate, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let d = (x - y).abs();
            if template.is_periodic(i) {
                d.min(1.0 - d)
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Reduces periodic angles mod 1.
pub fn canonicalize(template: &SequenceTemplate, solution: &SolutionSet) -> SolutionSet {
    SolutionSet { params: canonical_params(template, &solution.params), ..solution.clone() }
}

/// Canonicalizes, merges solutions within [`MERGE_DISTANCE`] (keeping the
/// lower cost) and sorts them by parameter vector.
pub fn merge_solutions(template: &SequenceTemplate, solutions: Vec<SolutionSet>) -> Vec<SolutionSet> {
    let mut sorted: Vec<SolutionSet> = solutions.iter().map(|s| canonicalize(template, s)).collect();
    sorted.sort_by(|a, b| lexicographic(&a.params, &b.params).then(a.cost.total_cmp(&b.cost)));
    let mut merged: Vec<SolutionSet> = Vec::new();
    for s in sorted {
        match merged.iter_mut().find(|m| param_distance(template, &m.params, &s.params) < MERGE_DISTANCE) {
            Some(m) if s.cost < m.cost => *m = s,
            Some(_) => {}
            None => merged.push(s),
        }
    }
    merged.sort_by(|a, b| lexicographic(&a.params, &b.params));
    merged
}

/// Serializable result of a search run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub template: String,
    pub target: LruKind,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    pub n_steps: usize,
    pub n_entangling: usize,
    pub solutions: Vec<SolutionSet>,
}

/// Runs [`optimize`] and packages the result.
pub fn search(template: &SequenceTemplate, target: LruKind, opts: &SearchOptions) -> Result<SearchReport> {
    let solutions = optimize(template, target, opts)?;
    Ok(SearchReport {
        template: template.id.clone(),
        target,
        seed: opts.seed,
        restarts: opts.restarts,
        tol: opts.tol,
        n_steps: template.n_steps(),
        n_entangling: template.n_entangling(),
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates::{parse_layout, template};

    fn tpl(layout: &str, grad: bool) -> SequenceTemplate {
        SequenceTemplate::new("t", "", parse_layout(layout).unwrap(), grad).unwrap()
    }

    fn opts(restarts: usize) -> SearchOptions {
        SearchOptions { restarts, ..Default::default() }
    }

    #[test]
    fn identity_and_swap_costs() {
        // φ = 0 everywhere is the identity.
        let t = tpl("XD Ug", false);
        assert!((cost(&[0.0, 0.0], &t, LruKind::Sil).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((cost(&[0.0, 0.0], &t, LruKind::Sinl).unwrap() - 0.25).abs() < 1e-12);
        // Exchanging the two pairs: U(½) X_D(½) X_A(½) U(½).
        let t = tpl("Ug XD XA Ug", false);
        let c = cost(&[0.5, 0.5, 0.5, 0.5], &t, LruKind::Sinl).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn arity_checked() {
        let t = tpl("XD Ug", false);
        assert!(matches!(cost(&[0.1], &t, LruKind::Sil), Err(Error::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn cost_in_unit_interval() {
        let t = template("sil-5").unwrap();
        let mut rng = restart_rng(3, 0);
        for _ in 0..50 {
            let x: Vec<f64> = (0..t.n_free()).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let c = cost(&x, &t, LruKind::Sil).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&c));
        }
    }

    #[test]
    fn validation() {
        let slots = parse_layout("XD XA").unwrap();
        assert!(SequenceTemplate::new("t", "", slots, true).is_err());
        let slots = parse_layout("U").unwrap();
        assert!(SequenceTemplate::new("t", "", slots, false).is_err());
        let slots = vec![Slot::Entangle { phi: Angle::Param(1), psi: Angle::Fixed(0.0) }];
        assert!(SequenceTemplate::new("t", "", slots, false).is_err());
    }

    #[test]
    fn periodicity() {
        let t = tpl("U Ug XD", true);
        assert!(!t.is_periodic(0));
        assert!(!t.is_periodic(1));
        assert!(t.is_periodic(2));
        assert!(t.is_periodic(3));
        let g = GateDescriptor::Entangle { phi: 0.3, psi: 0.2 };
        let h = GateDescriptor::Entangle { phi: 1.3, psi: 0.2 };
        let (same, _) = crate::spin::equal_up_to_global_phase(&g.unitary(), &h.unitary(), 1e-9);
        assert!(!same);
    }

    #[test]
    fn canonical_example() {
        let r = canonicalize_values(&[1.345073936796977])[0];
        assert_eq!(format!("{r:.15}"), "0.345073936796977");
        assert_eq!(canonicalize_values(&[-0.25])[0], 0.75);
    }

    #[test]
    fn merge_keeps_lower_cost() {
        let t = tpl("XD Ug", false);
        let verdict = verify(&assemble(&[]), LruKind::Sil, 1e-8).unwrap();
        let s = |p: Vec<f64>, c: f64| SolutionSet { template: "t".into(), params: p, cost: c, verdict: verdict.clone() };
        let merged = merge_solutions(
            &t,
            vec![s(vec![0.5, 0.2], 1e-10), s(vec![1.5 + 1e-8, 0.2], 1e-12), s(vec![0.1, 0.2], 1e-9)],
        );
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].params, vec![0.1, 0.2]);
        assert_eq!(merged[1].cost, 1e-12);
    }

    #[test]
    fn sinl_three_steps() {
        let t = template("sinl-3").unwrap();
        let found = optimize(&t, LruKind::Sinl, &opts(10)).unwrap();
        assert!(!found.is_empty());
        for s in &found {
            assert!(s.cost < 1e-8 && s.verdict.pass);
            assert!(s.params.iter().enumerate().all(|(i, p)| !t.is_periodic(i) || (0.0..1.0).contains(p)));
        }
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let t = template("sinl-3").unwrap();
        let a = optimize(&t, LruKind::Sinl, &opts(6)).unwrap();
        let b = optimize(&t, LruKind::Sinl, &opts(6)).unwrap();
        let c = optimize(&t, LruKind::Sinl, &SearchOptions { execution: Execution::Sequential, ..opts(6) }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn report_json_round_trip() {
        let t = template("sinl-3").unwrap();
        let r = search(&t, LruKind::Sinl, &opts(3)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: SearchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.template, "sinl-3");
        assert_eq!(back.solutions.len(), r.solutions.len());
    }
}
