//! SIL / SINL truth tables and the verifier that certifies a four-spin
//! unitary as a leakage reduction unit.
//!
//! Both LRUs start with the ancilla in |S⟩. On the two computational inputs
//! the unitary must act as the identity (SIL) or as a swap of the logical
//! states (SINL), with one phase shared by both inputs. A leaked data input
//! only has to land in a two-dimensional subspace: the leakage moves to the
//! ancilla DQD for SIL and stays on the first DQD for SINL.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{product_state, GateDescriptor, PairState, REGISTER_SPINS};
use crate::spin::{self, PureState, UnitaryOp, Vector, C64, UNITARY_TOL};

/// Default pass/fail tolerance on truth-table infidelities.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LruKind {
    /// SWAP If Leaked
    Sil,
    /// SWAP If Not Leaked
    Sinl,
}

impl fmt::Display for LruKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LruKind::Sil => "sil",
            LruKind::Sinl => "sinl",
        })
    }
}

impl FromStr for LruKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sil" => Ok(LruKind::Sil),
            "sinl" => Ok(LruKind::Sinl),
            other => Err(Error::InvalidTemplate(format!("unknown LRU kind {other:?}"))),
        }
    }
}

/// Product label `|d a⟩` with `d` on QD₁,QD₂ and `a` on QD₃,QD₄.
pub type Product = (PairState, PairState);

#[derive(Clone, Debug, PartialEq)]
pub struct ComputationalRow {
    pub input: Product,
    pub target: Product,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeakedRow {
    pub input: Product,
    /// Ordered basis of the allowed output subspace: the α and β directions.
    pub allowed: [Product; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct LruTruthTable {
    pub kind: LruKind,
    pub computational: [ComputationalRow; 2],
    pub leaked: [LeakedRow; 2],
}

pub fn build_target(kind: LruKind) -> LruTruthTable {
    use PairState::*;
    let comp = |input, target| ComputationalRow { input, target };
    match kind {
        LruKind::Sil => LruTruthTable {
            kind,
            computational: [comp((S, S), (S, S)), comp((T0, S), (T0, S))],
            leaked: [
                LeakedRow { input: (TPlus, S), allowed: [(S, TPlus), (T0, TPlus)] },
                LeakedRow { input: (TMinus, S), allowed: [(S, TMinus), (T0, TMinus)] },
            ],
        },
        LruKind::Sinl => LruTruthTable {
            kind,
            computational: [comp((S, S), (S, S)), comp((T0, S), (S, T0))],
            leaked: [
                LeakedRow { input: (TPlus, S), allowed: [(TPlus, S), (TPlus, T0)] },
                LeakedRow { input: (TMinus, S), allowed: [(TMinus, S), (TMinus, T0)] },
            ],
        },
    }
}

fn ket(p: Product) -> PureState {
    product_state(p.0, p.1)
}

impl LruTruthTable {
    /// Inputs in the order |S S⟩, |T0 S⟩, |T+ S⟩, |T− S⟩.
    pub fn inputs(&self) -> [PureState; 4] {
        [
            ket(self.computational[0].input),
            ket(self.computational[1].input),
            ket(self.leaked[0].input),
            ket(self.leaked[1].input),
        ]
    }

    /// Scores the four images `U|iₖ⟩` of the inputs.
    pub fn score(&self, outputs: &[Vector; 4]) -> TableScore {
        let t1 = ket(self.computational[0].target);
        let t2 = ket(self.computational[1].target);
        let a1 = t1.amplitudes().dotc(&outputs[0]);
        let a2 = t2.amplitudes().dotc(&outputs[1]);
        let leak = |row: &LeakedRow, out: &Vector| {
            let alpha = ket(row.allowed[0]).amplitudes().dotc(out);
            let beta = ket(row.allowed[1]).amplitudes().dotc(out);
            (alpha, beta)
        };
        TableScore {
            comp: [a1, a2],
            plus: leak(&self.leaked[0], &outputs[2]),
            minus: leak(&self.leaked[1], &outputs[3]),
        }
    }
}

/// Overlaps of the images of the four inputs with their targets.
#[derive(Clone, Copy, Debug)]
pub struct TableScore {
    /// ⟨t₁|U|i₁⟩, ⟨t₂|U|i₂⟩
    pub comp: [C64; 2],
    /// Components of U|T+ S⟩ along the allowed basis.
    pub plus: (C64, C64),
    /// Components of U|T− S⟩ along the allowed basis.
    pub minus: (C64, C64),
}

impl TableScore {
    /// |⟨t₁|U|i₁⟩ + ⟨t₂|U|i₂⟩|² / 4: equals 1 only with a shared phase.
    pub fn computational_fidelity(&self) -> f64 {
        (self.comp[0] + self.comp[1]).norm_sqr() / 4.0
    }

    pub fn plus_fidelity(&self) -> f64 {
        self.plus.0.norm_sqr() + self.plus.1.norm_sqr()
    }

    pub fn minus_fidelity(&self) -> f64 {
        self.minus.0.norm_sqr() + self.minus.1.norm_sqr()
    }

    pub fn common_phase(&self) -> f64 {
        (self.comp[0] + self.comp[1]).arg()
    }

    /// 1 − (F_c + F_+ + F_−)/3, clamped to [0, 1].
    pub fn cost(&self) -> f64 {
        let f = self.computational_fidelity() + self.plus_fidelity() + self.minus_fidelity();
        (1.0 - f / 3.0).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

/// Outcome of [`verify`]. Complex constants serialize as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LruVerdict {
    pub kind: LruKind,
    pub pass: bool,
    pub theta: f64,
    pub alpha1: C64,
    pub beta1: C64,
    pub alpha2: C64,
    pub beta2: C64,
    pub residuals: Vec<Residual>,
}

impl LruVerdict {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.value))
    }

    /// |α₁|, |β₁|, |α₂|, |β₂|
    pub fn moduli(&self) -> [f64; 4] {
        [self.alpha1.norm(), self.beta1.norm(), self.alpha2.norm(), self.beta2.norm()]
    }
}

/// Certifies `u` against the truth table of `kind`.
///
/// Passes when the shared-phase computational fidelity and both leaked
/// subspace overlaps are within `tol` of one. α, β are the components of
/// the leaked outputs along the allowed basis with the common phase removed.
pub fn verify(u: &UnitaryOp, kind: LruKind, tol: f64) -> Result<LruVerdict> {
    if u.n_spins() != REGISTER_SPINS {
        return Err(Error::SizeMismatch { expected: REGISTER_SPINS, got: u.n_spins() });
    }
    let unitarity = u.unitarity_residual();
    if unitarity > tol.max(UNITARY_TOL) {
        return Err(Error::NotUnitary(unitarity));
    }
    let table = build_target(kind);
    let outputs = table.inputs().map(|s| u.matrix() * s.amplitudes());
    let score = table.score(&outputs);

    let theta = score.common_phase();
    let unphase = C64::from_polar(1.0, -theta);
    let dist = |k: usize, target: Product| {
        (&outputs[k] - ket(target).amplitudes() * C64::from_polar(1.0, theta)).norm_squared()
    };
    let comp_infidelity = 1.0 - score.computational_fidelity();
    let plus_infidelity = 1.0 - score.plus_fidelity();
    let minus_infidelity = 1.0 - score.minus_fidelity();
    let pass = comp_infidelity <= tol && plus_infidelity <= tol && minus_infidelity <= tol;

    let r = |name: &str, value: f64| Residual { name: name.into(), value: value.max(0.0) };
    Ok(LruVerdict {
        kind,
        pass,
        theta,
        alpha1: score.plus.0 * unphase,
        beta1: score.plus.1 * unphase,
        alpha2: score.minus.0 * unphase,
        beta2: score.minus.1 * unphase,
        residuals: vec![
            r("computational", comp_infidelity),
            r("row1", dist(0, table.computational[0].target)),
            r("row2", dist(1, table.computational[1].target)),
            r("row3", plus_infidelity),
            r("row4", minus_infidelity),
            r("unitarity", unitarity),
        ],
    })
}

/// Composed unitary of a gate list, first gate applied first.
pub fn assemble(sequence: &[GateDescriptor]) -> UnitaryOp {
    let gates: Vec<UnitaryOp> = sequence.iter().map(GateDescriptor::unitary).collect();
    spin::compose(&gates, REGISTER_SPINS).expect("all descriptors act on the four-spin register")
}
