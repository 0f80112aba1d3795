#![allow(dead_code)]

use rand::Rng;
use stq_lru::gates::{product_state, GateDescriptor, Dqd};
use stq_lru::lru::{build_target, LruKind};
use stq_lru::spin::{Matrix, UnitaryOp, Vector, C64};

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

/// Unitary whose first columns are `fixed` (orthonormal), the rest random.
fn unitary_with_columns(fixed: &[Vector], rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::from_fn(16, 16, |_, _| random_c64(rng));
    for (k, v) in fixed.iter().enumerate() {
        m.set_column(k, v);
    }
    let mut q = m.qr().q();
    for (k, v) in fixed.iter().enumerate() {
        q.set_column(k, v);
    }
    q
}

pub fn random_unitary(rng: &mut impl Rng) -> UnitaryOp {
    UnitaryOp::new(unitary_with_columns(&[], rng)).unwrap()
}

fn random_phase(rng: &mut impl Rng) -> C64 {
    C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
}

/// A random unitary satisfying the truth table of `kind`: a common phase on
/// the computational rows, random normalized (α, β) on the leaked rows and a
/// random completion elsewhere.
pub fn random_oracle(kind: LruKind, rng: &mut impl Rng) -> UnitaryOp {
    let t = build_target(kind);
    let ket = |p: (stq_lru::gates::PairState, stq_lru::gates::PairState)| product_state(p.0, p.1).amplitudes().clone();
    let inputs: Vec<Vector> = t.inputs().iter().map(|s| s.amplitudes().clone()).collect();
    let phase = random_phase(rng);
    let mut outputs = vec![ket(t.computational[0].target) * phase, ket(t.computational[1].target) * phase];
    for row in &t.leaked {
        let a = rng.random::<f64>();
        let (c, s) = (a.sqrt(), (1.0 - a).sqrt());
        outputs.push(ket(row.allowed[0]) * (random_phase(rng) * c) + ket(row.allowed[1]) * (random_phase(rng) * s));
    }
    let vin = unitary_with_columns(&inputs, rng);
    let vout = unitary_with_columns(&outputs, rng);
    let mut w = Matrix::identity(16, 16);
    let tail = unitary_with_columns(&[], rng);
    // Random unitary on the complement of the first four columns.
    let tail12 = tail.view((0, 0), (12, 12)).clone_owned().qr().q();
    w.view_mut((4, 4), (12, 12)).copy_from(&tail12);
    UnitaryOp::new(vout * w * vin.adjoint()).unwrap()
}

pub fn random_gate(rng: &mut impl Rng) -> GateDescriptor {
    let dqd = if rng.random_bool(0.5) { Dqd::D } else { Dqd::A };
    let x = rng.random::<f64>() * 4.0 - 2.0;
    match rng.random_range(0..3) {
        0 => GateDescriptor::Phase { dqd, phi: x },
        1 => GateDescriptor::Exchange { dqd, phi: x },
        _ => GateDescriptor::Entangle { phi: x, psi: rng.random::<f64>() * 2.0 - 1.0 },
    }
}
