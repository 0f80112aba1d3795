//! Gate set of a data/ancilla pair of singlet–triplet qubits.
//!
//! The register holds four spins, QD₁…QD₄ at sites 0…3. The data qubit
//! `D` lives on sites (0, 1), the ancilla `A` on sites (2, 3), and the
//! entangling gate couples the inner spins (1, 2). All angles are
//! dimensionless: a phase gate with angle `φ` is `exp(−i 2π (φ/2)(σᶻᵢ − σᶻⱼ))`,
//! an exchange gate `exp(−i 2π (φ/4)(σᵢ·σⱼ − 1))`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{
    self, embed_matrix, exp_generator, pauli_z, sigma_dot_sigma, HermitianGenerator, Matrix,
    PureState, UnitaryOp, C64,
};

/// Number of spins in the data + ancilla register.
pub const REGISTER_SPINS: usize = 4;

/// Spins coupled by the entangling gate (QD₂, QD₃).
pub const INTER_PAIR: SpinPair = SpinPair { first: 1, second: 2 };

/// Ordered pair of distinct spins of the four-spin register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinPair {
    first: usize,
    second: usize,
}

impl SpinPair {
    pub fn new(first: usize, second: usize) -> Result<Self> {
        if first == second || first >= REGISTER_SPINS || second >= REGISTER_SPINS {
            return Err(Error::InvalidPair(first, second));
        }
        Ok(Self { first, second })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn second(&self) -> usize {
        self.second
    }

    pub fn sites(&self) -> [usize; 2] {
        [self.first, self.second]
    }
}

/// The two double quantum dots of the register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dqd {
    /// Data qubit on QD₁, QD₂.
    D,
    /// Ancilla qubit on QD₃, QD₄.
    A,
}

impl Dqd {
    pub fn pair(self) -> SpinPair {
        match self {
            Dqd::D => SpinPair { first: 0, second: 1 },
            Dqd::A => SpinPair { first: 2, second: 3 },
        }
    }
}

impl fmt::Display for Dqd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dqd::D => "D",
            Dqd::A => "A",
        })
    }
}

impl FromStr for Dqd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D" | "d" => Ok(Dqd::D),
            "A" | "a" => Ok(Dqd::A),
            other => Err(Error::GateParse(other.into(), "expected D or A".into())),
        }
    }
}

/// Two-electron states of one double dot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairState {
    S,
    T0,
    TPlus,
    TMinus,
}

impl PairState {
    pub const ALL: [PairState; 4] = [PairState::S, PairState::T0, PairState::TPlus, PairState::TMinus];

    /// Amplitudes in the `{↓↓, ↓↑, ↑↓, ↑↑}` index order.
    pub fn amplitudes(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            PairState::S => [0.0, -h, h, 0.0],
            PairState::T0 => [0.0, h, h, 0.0],
            PairState::TPlus => [0.0, 0.0, 0.0, 1.0],
            PairState::TMinus => [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn state(self) -> PureState {
        let v = spin::Vector::from_iterator(4, self.amplitudes().iter().map(|&x| C64::new(x, 0.0)));
        PureState::from_vector_unchecked(v)
    }

    pub fn is_leaked(self) -> bool {
        matches!(self, PairState::TPlus | PairState::TMinus)
    }

    pub fn label(self) -> &'static str {
        match self {
            PairState::S => "S",
            PairState::T0 => "T0",
            PairState::TPlus => "T+",
            PairState::TMinus => "T-",
        }
    }
}

/// `|d⟩ ⊗ |a⟩` with `d` on QD₁,QD₂ and `a` on QD₃,QD₄.
pub fn product_state(d: PairState, a: PairState) -> PureState {
    d.state().kron(&a.state())
}

/// Singlet–triplet basis of a DQD placed on a spin pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DqdEncoding {
    pub pair: SpinPair,
}

impl DqdEncoding {
    pub fn new(dqd: Dqd) -> Self {
        Self { pair: dqd.pair() }
    }

    /// The basis vectors `S, T0, T+, T−` of the pair subspace.
    pub fn basis(&self) -> [PureState; 4] {
        PairState::ALL.map(PairState::state)
    }

    /// `|b⟩⟨k|` on the pair, as a 4 × 4 local matrix.
    fn outer(b: PairState, k: PairState) -> Matrix {
        let bv = b.amplitudes();
        let kv = k.amplitudes();
        Matrix::from_fn(4, 4, |r, c| C64::new(bv[r] * kv[c], 0.0))
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pair_sz_difference() -> Matrix {
    let id = Matrix::identity(2, 2);
    pauli_z().kronecker(&id) - id.kronecker(&pauli_z())
}

fn embed_pair(local: &Matrix, pair: SpinPair) -> HermitianGenerator {
    let m = embed_matrix(local, &pair.sites(), REGISTER_SPINS).expect("valid pair");
    HermitianGenerator::new(m).expect("pair generators are Hermitian")
}

/// `2π (φ/2)(σᶻᵢ − σᶻⱼ)`
pub fn phase_generator(pair: SpinPair, phi: f64) -> HermitianGenerator {
    embed_pair(&(pair_sz_difference() * c(PI * phi)), pair)
}

/// `2π (φ/4)(σᵢ·σⱼ − 1)`
pub fn exchange_generator(pair: SpinPair, phi: f64) -> HermitianGenerator {
    let local = (sigma_dot_sigma() - Matrix::identity(4, 4)) * c(PI * phi / 2.0);
    embed_pair(&local, pair)
}

/// Generator of the entangling gate: exchange `φ` plus gradient `ψ` on one pair.
pub fn entangle_generator(pair: SpinPair, phi: f64, psi: f64) -> HermitianGenerator {
    exchange_generator(pair, phi)
        .plus(&phase_generator(pair, psi))
        .expect("same register")
}

pub fn phase_gate(pair: SpinPair, phi: f64) -> UnitaryOp {
    exp_generator(&phase_generator(pair, phi))
}

pub fn exchange_gate(pair: SpinPair, phi: f64) -> UnitaryOp {
    exp_generator(&exchange_generator(pair, phi))
}

/// `U_{φ,ψ}` between QD₂ and QD₃.
pub fn entangle_gate(phi: f64, psi: f64) -> UnitaryOp {
    entangle_gate_on(INTER_PAIR, phi, psi)
}

pub fn entangle_gate_on(pair: SpinPair, phi: f64, psi: f64) -> UnitaryOp {
    exp_generator(&entangle_generator(pair, phi, psi))
}

/// Logical operators of one DQD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicalKind {
    TauX,
    TauZ,
    Hadamard,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LogicalOperator {
    Generator(HermitianGenerator),
    Unitary(UnitaryOp),
}

/// τz = |T0⟩⟨T0| − |S⟩⟨S| on one DQD; zero on T±.
pub fn tau_z(dqd: Dqd) -> HermitianGenerator {
    use PairState::*;
    let local = DqdEncoding::outer(T0, T0) - DqdEncoding::outer(S, S);
    embed_pair(&local, dqd.pair())
}

/// τx = |S⟩⟨T0| + |T0⟩⟨S| on one DQD; zero on T±.
pub fn tau_x(dqd: Dqd) -> HermitianGenerator {
    use PairState::*;
    let local = DqdEncoding::outer(S, T0) + DqdEncoding::outer(T0, S);
    embed_pair(&local, dqd.pair())
}

/// The operator `|S⟩⟨T0| + |S⟩⟨T0|` (not Hermitian), kept to evaluate the
/// long-range construction with this literal form of τx.
pub fn tau_x_literal(dqd: Dqd) -> Matrix {
    use PairState::*;
    let local = DqdEncoding::outer(S, T0) * c(2.0);
    embed_matrix(&local, &dqd.pair().sites(), REGISTER_SPINS).expect("valid pair")
}

/// Logical Hadamard `(τx + τz)/√2` on span{S, T0}, identity on span{T+, T−}.
///
/// On the Bloch sphere with |↑↓⟩, |↓↑⟩ at the poles this is the usual
/// Hadamard: it maps |↑↓⟩ to |T0⟩ and |S⟩ to (|T0⟩ − |S⟩)/√2.
pub fn hadamard(dqd: Dqd) -> UnitaryOp {
    use PairState::*;
    let e = DqdEncoding::outer;
    let logical = (e(S, T0) + e(T0, S) + e(T0, T0) - e(S, S)) * c(FRAC_1_SQRT_2);
    let local = logical + e(TPlus, TPlus) + e(TMinus, TMinus);
    let m = embed_matrix(&local, &dqd.pair().sites(), REGISTER_SPINS).expect("valid pair");
    UnitaryOp::new(m).expect("Hadamard is unitary")
}

pub fn logical_operator(kind: LogicalKind, dqd: Dqd) -> LogicalOperator {
    match kind {
        LogicalKind::TauX => LogicalOperator::Generator(tau_x(dqd)),
        LogicalKind::TauZ => LogicalOperator::Generator(tau_z(dqd)),
        LogicalKind::Hadamard => LogicalOperator::Unitary(hadamard(dqd)),
    }
}

/// `exp(−iθ τz^D τz^A)`
pub fn zz_gate(theta: f64) -> UnitaryOp {
    let m = tau_z(Dqd::D).matrix() * tau_z(Dqd::A).matrix() * c(theta);
    exp_generator(&HermitianGenerator::new(m).expect("commuting Hermitian product"))
}

/// `exp(−iθ τx)` on one DQD.
pub fn tau_x_rotation(dqd: Dqd, theta: f64) -> UnitaryOp {
    exp_generator(&tau_x(dqd).scaled(theta))
}

/// `exp(−iθ τz)` on one DQD.
pub fn tau_z_rotation(dqd: Dqd, theta: f64) -> UnitaryOp {
    exp_generator(&tau_z(dqd).scaled(theta))
}

/// The SINL operation built from the effective τz^D τz^A coupling:
/// `H^D · ZZ(π/4) · e^{−i(3π/4)τx^D} · e^{−i(3π/4)τx^A} · ZZ(π/4) · H^A`,
/// rightmost factor first.
pub fn sinl_longrange() -> UnitaryOp {
    spin::compose(&sinl_longrange_sequence().iter().map(GateDescriptor::unitary).collect::<Vec<_>>(), REGISTER_SPINS)
        .expect("four-spin gates")
}

/// The long-range SINL as a gate list in temporal order.
pub fn sinl_longrange_sequence() -> Vec<GateDescriptor> {
    let quarter = PI / 4.0;
    let three_quarter = 3.0 * PI / 4.0;
    vec![
        GateDescriptor::Hadamard { dqd: Dqd::A },
        GateDescriptor::ZZ { theta: quarter },
        GateDescriptor::TauX { dqd: Dqd::A, theta: three_quarter },
        GateDescriptor::TauX { dqd: Dqd::D, theta: three_quarter },
        GateDescriptor::ZZ { theta: quarter },
        GateDescriptor::Hadamard { dqd: Dqd::D },
    ]
}

/// Same construction with the literal (non-Hermitian) τx. The nilpotent
/// exponential `exp(−iθN) = 1 − iθN` is used since `N² = 0`. The result is
/// returned as a raw matrix together with its unitarity residual.
pub fn sinl_longrange_literal() -> (Matrix, f64) {
    let three_quarter = 3.0 * PI / 4.0;
    let id = Matrix::identity(16, 16);
    let nil = |dqd| &id - tau_x_literal(dqd) * C64::new(0.0, three_quarter);
    let zz = zz_gate(PI / 4.0).into_matrix();
    let m = hadamard(Dqd::D).into_matrix() * &zz * nil(Dqd::D) * nil(Dqd::A) * &zz * hadamard(Dqd::A).into_matrix();
    let residual = spin::max_abs(&(m.adjoint() * &m - &id));
    (m, residual)
}

/// Rotation acting only on the antiparallel block {↑↓, ↓↑} of a spin pair.
///
/// Every phase, exchange and entangling gate has this form:
/// `e^{iπa} exp(−i[πa X + 2πb Z])` on the block, identity on ↑↑ and ↓↓,
/// with `(a, b) = (0, φ)` for phase gates, `(φ, 0)` for exchange gates and
/// `(φ, ψ)` for the entangling gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRotation {
    first_bit: usize,
    second_bit: usize,
    block: [[C64; 2]; 2],
}

impl PairRotation {
    pub fn new(pair: SpinPair, a: f64, b: f64) -> Self {
        let hx = PI * a;
        let hz = 2.0 * PI * b;
        let r = hx.hypot(hz);
        let (sin_r, cos_r) = r.sin_cos();
        let sinc = if r < 1e-300 { 1.0 } else { sin_r / r };
        let g = C64::from_polar(1.0, PI * a);
        let block = [
            [g * C64::new(cos_r, -sinc * hz), g * C64::new(0.0, -sinc * hx)],
            [g * C64::new(0.0, -sinc * hx), g * C64::new(cos_r, sinc * hz)],
        ];
        Self {
            first_bit: spin::bit_of(pair.first, REGISTER_SPINS),
            second_bit: spin::bit_of(pair.second, REGISTER_SPINS),
            block,
        }
    }

    /// Applies the rotation in place to a 16-amplitude state.
    pub fn apply(&self, amps: &mut [C64]) {
        let m1 = 1usize << self.first_bit;
        let m2 = 1usize << self.second_bit;
        for idx in 0..amps.len() {
            // visit each (↑↓, ↓↑) pair once, from its ↑↓ member
            if idx & m1 != 0 && idx & m2 == 0 {
                let other = idx ^ m1 ^ m2;
                let (x, y) = (amps[idx], amps[other]);
                amps[idx] = self.block[0][0] * x + self.block[0][1] * y;
                amps[other] = self.block[1][0] * x + self.block[1][1] * y;
            }
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(16, 16);
        let m1 = 1usize << self.first_bit;
        let m2 = 1usize << self.second_bit;
        for idx in 0..16 {
            if idx & m1 != 0 && idx & m2 == 0 {
                let other = idx ^ m1 ^ m2;
                m[(idx, idx)] = self.block[0][0];
                m[(idx, other)] = self.block[0][1];
                m[(other, idx)] = self.block[1][0];
                m[(other, other)] = self.block[1][1];
            }
        }
        m
    }
}

/// Three entangling gates that replace `U(½, 0)` = SWAP of QD₂, QD₃ when
/// only gradient-carrying pulses are available.
pub fn swap_decomposition() -> [GateDescriptor; 3] {
    let outer = GateDescriptor::Entangle { phi: 0.5 * FRAC_1_SQRT_2, psi: 0.25 * FRAC_1_SQRT_2 };
    [outer, GateDescriptor::Entangle { phi: 0.0, psi: 0.25 }, outer]
}

/// How far [`swap_decomposition`] is from SWAP₂₃.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    /// Uniform phase of the product on the antiparallel block, in (−π, π].
    pub antiparallel_phase: f64,
    /// Max deviation from `e^{iθ}·SWAP` on the antiparallel block.
    pub antiparallel_deviation: f64,
    /// Max deviation from the identity on the parallel block.
    pub parallel_deviation: f64,
}

/// Compares the product of [`swap_decomposition`] with SWAP₂₃ block by block.
pub fn decomposition_check() -> DecompositionCheck {
    let product = swap_decomposition()
        .iter()
        .fold(Matrix::identity(16, 16), |acc, g| g.unitary().matrix() * acc);
    let swap = GateDescriptor::Entangle { phi: 0.5, psi: 0.0 }.unitary();
    // W = SWAP† · product is diagonal in the spin basis if the claim holds.
    let w = swap.matrix().adjoint() * product;
    let (b1, b2) = (
        spin::bit_of(INTER_PAIR.first, REGISTER_SPINS),
        spin::bit_of(INTER_PAIR.second, REGISTER_SPINS),
    );
    let antiparallel = |i: usize| ((i >> b1) & 1) != ((i >> b2) & 1);
    let theta = (0..16).filter(|&i| antiparallel(i)).map(|i| w[(i, i)]).sum::<C64>().arg();
    let phase = C64::from_polar(1.0, theta);
    let (mut anti, mut par) = (0.0f64, 0.0f64);
    for i in 0..16 {
        for j in 0..16 {
            let expected = match (i == j, antiparallel(i)) {
                (false, _) => C64::new(0.0, 0.0),
                (true, true) => phase,
                (true, false) => C64::new(1.0, 0.0),
            };
            let dev = (w[(i, j)] - expected).norm();
            if antiparallel(i) || antiparallel(j) {
                anti = anti.max(dev);
            } else {
                par = par.max(dev);
            }
        }
    }
    DecompositionCheck { antiparallel_phase: theta, antiparallel_deviation: anti, parallel_deviation: par }
}

/// Symbolic gate on the four-spin register.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GateDescriptor {
    /// `Z(D|A, φ)`
    Phase { dqd: Dqd, phi: f64 },
    /// `X(D|A, φ)`
    Exchange { dqd: Dqd, phi: f64 },
    /// `U(φ, ψ)` on QD₂, QD₃.
    Entangle { phi: f64, psi: f64 },
    /// `TX(D|A, θ)` = exp(−iθ τx)
    TauX { dqd: Dqd, theta: f64 },
    /// `TZ(D|A, θ)` = exp(−iθ τz)
    TauZ { dqd: Dqd, theta: f64 },
    /// `H(D|A)`
    Hadamard { dqd: Dqd },
    /// `ZZ(θ)` = exp(−iθ τz^D τz^A)
    ZZ { theta: f64 },
}

/// `x mod 1` in `[0, 1)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl GateDescriptor {
    /// Full 16 × 16 unitary, built from the Hermitian generator.
    pub fn unitary(&self) -> UnitaryOp {
        match *self {
            GateDescriptor::Phase { dqd, phi } => phase_gate(dqd.pair(), phi),
            GateDescriptor::Exchange { dqd, phi } => exchange_gate(dqd.pair(), phi),
            GateDescriptor::Entangle { phi, psi } => entangle_gate(phi, psi),
            GateDescriptor::TauX { dqd, theta } => tau_x_rotation(dqd, theta),
            GateDescriptor::TauZ { dqd, theta } => tau_z_rotation(dqd, theta),
            GateDescriptor::Hadamard { dqd } => hadamard(dqd),
            GateDescriptor::ZZ { theta } => zz_gate(theta),
        }
    }

    /// Closed-form pair rotation, for the gates that have one.
    pub fn pair_rotation(&self) -> Option<PairRotation> {
        match *self {
            GateDescriptor::Phase { dqd, phi } => Some(PairRotation::new(dqd.pair(), 0.0, phi)),
            GateDescriptor::Exchange { dqd, phi } => Some(PairRotation::new(dqd.pair(), phi, 0.0)),
            GateDescriptor::Entangle { phi, psi } => Some(PairRotation::new(INTER_PAIR, phi, psi)),
            _ => None,
        }
    }

    /// Reduces angles mod 1 wherever that leaves the unitary unchanged.
    ///
    /// Phase and exchange gates have period 1 exactly. The entangling gate
    /// is periodic in `φ` only when `ψ = 0` and in `ψ` only when `φ = 0`.
    pub fn reduced(&self) -> Self {
        match *self {
            GateDescriptor::Phase { dqd, phi } => GateDescriptor::Phase { dqd, phi: reduce_angle(phi) },
            GateDescriptor::Exchange { dqd, phi } => GateDescriptor::Exchange { dqd, phi: reduce_angle(phi) },
            GateDescriptor::Entangle { phi, psi } if psi == 0.0 => GateDescriptor::Entangle { phi: reduce_angle(phi), psi },
            GateDescriptor::Entangle { phi, psi } if phi == 0.0 => GateDescriptor::Entangle { phi, psi: reduce_angle(psi) },
            other => other,
        }
    }
}

impl fmt::Display for GateDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` on f64 is the shortest string that parses back to the same value
        match self {
            GateDescriptor::Phase { dqd, phi } => write!(f, "Z({dqd},{phi:?})"),
            GateDescriptor::Exchange { dqd, phi } => write!(f, "X({dqd},{phi:?})"),
            GateDescriptor::Entangle { phi, psi } => write!(f, "U({phi:?},{psi:?})"),
            GateDescriptor::TauX { dqd, theta } => write!(f, "TX({dqd},{theta:?})"),
            GateDescriptor::TauZ { dqd, theta } => write!(f, "TZ({dqd},{theta:?})"),
            GateDescriptor::Hadamard { dqd } => write!(f, "H({dqd})"),
            GateDescriptor::ZZ { theta } => write!(f, "ZZ({theta:?})"),
        }
    }
}

fn parse_angle(text: &str, whole: &str) -> Result<f64> {
    let t = text.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::GateParse(whole.into(), format!("bad angle {t:?}")))?;
    if !v.is_finite() {
        return Err(Error::GateParse(whole.into(), "angle must be finite".into()));
    }
    Ok(v)
}

impl FromStr for GateDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let whole = s.trim();
        let err = |msg: &str| Error::GateParse(whole.into(), msg.into());
        let open = whole.find('(').ok_or_else(|| err("missing '('"))?;
        if !whole.ends_with(')') {
            return Err(err("missing ')'"));
        }
        let name = whole[..open].trim();
        let args: Vec<&str> = whole[open + 1..whole.len() - 1].split(',').map(str::trim).collect();
        let want = |n: usize| {
            if args.len() == n && args.iter().all(|a| !a.is_empty()) {
                Ok(())
            } else {
                Err(err(&format!("{name} takes {n} argument(s)")))
            }
        };
        match name {
            "Z" => {
                want(2)?;
                Ok(GateDescriptor::Phase { dqd: args[0].parse()?, phi: parse_angle(args[1], whole)? })
            }
            "X" => {
                want(2)?;
                Ok(GateDescriptor::Exchange { dqd: args[0].parse()?, phi: parse_angle(args[1], whole)? })
            }
            "U" => {
                want(2)?;
                Ok(GateDescriptor::Entangle { phi: parse_angle(args[0], whole)?, psi: parse_angle(args[1], whole)? })
            }
            "TX" => {
                want(2)?;
                Ok(GateDescriptor::TauX { dqd: args[0].parse()?, theta: parse_angle(args[1], whole)? })
            }
            "TZ" => {
                want(2)?;
                Ok(GateDescriptor::TauZ { dqd: args[0].parse()?, theta: parse_angle(args[1], whole)? })
            }
            "H" => {
                want(1)?;
                Ok(GateDescriptor::Hadamard { dqd: args[0].parse()? })
            }
            "ZZ" => {
                want(1)?;
                Ok(GateDescriptor::ZZ { theta: parse_angle(args[0], whole)? })
            }
            _ => Err(err("unknown gate")),
        }
    }
}

/// Parses a sequence file: one gate per line, `#` starts a comment.
pub fn parse_sequence(text: &str) -> Result<Vec<GateDescriptor>> {
    text.lines()
        .enumerate()
        .filter_map(|(no, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then_some((no, body))
        })
        .map(|(no, body)| {
            body.parse().map_err(|e| match e {
                Error::GateParse(g, m) => Error::GateParse(g, format!("line {}: {m}", no + 1)),
                other => other,
            })
        })
        .collect()
}

pub fn format_sequence(gates: &[GateDescriptor]) -> String {
    gates.iter().map(|g| format!("{g}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{check_sz_conservation, equal_up_to_global_phase, max_abs};

    const TOL: f64 = 1e-10;

    fn d_pair() -> SpinPair {
        Dqd::D.pair()
    }

    fn apply(u: &UnitaryOp, d: PairState, a: PairState) -> spin::Vector {
        u.apply(&product_state(d, a)).unwrap().amplitudes().clone()
    }

    fn vec_of(d: PairState, a: PairState) -> spin::Vector {
        product_state(d, a).amplitudes().clone()
    }

    /// Permutation matrix exchanging two spins, built bit by bit.
    fn swap_oracle(i: usize, j: usize) -> Matrix {
        let (bi, bj) = (3 - i, 3 - j);
        let mut m = Matrix::zeros(16, 16);
        for col in 0..16usize {
            let vi = (col >> bi) & 1;
            let vj = (col >> bj) & 1;
            let row = (col & !(1 << bi) & !(1 << bj)) | (vj << bi) | (vi << bj);
            m[(row, col)] = C64::new(1.0, 0.0);
        }
        m
    }

    #[test]
    fn encoding_is_orthonormal() {
        let basis = DqdEncoding::new(Dqd::D).basis();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        assert_eq!(PairState::S.state().sz_expectation(), 0.0);
        assert_eq!(PairState::T0.state().sz_expectation(), 0.0);
        assert_eq!(PairState::TPlus.state().sz_expectation(), 1.0);
    }

    #[test]
    fn pair_rejects_invalid() {
        assert!(SpinPair::new(1, 1).is_err());
        assert!(SpinPair::new(0, 4).is_err());
        assert!(SpinPair::new(3, 0).is_ok());
    }

    #[test]
    fn phase_gate_examples() {
        use PairState::*;
        let z = phase_gate(d_pair(), 0.37);
        assert!((apply(&z, TPlus, S) - vec_of(TPlus, S)).norm() < TOL);
        assert!((apply(&z, TMinus, T0) - vec_of(TMinus, T0)).norm() < TOL);

        let z = phase_gate(d_pair(), 0.25);
        let expected = vec_of(T0, S) * C64::new(0.0, -1.0);
        assert!((apply(&z, S, S) - expected).norm() < TOL);

        assert!(max_abs(&(phase_gate(d_pair(), 1.0).into_matrix() - Matrix::identity(16, 16))) < TOL);
    }

    #[test]
    fn exchange_gate_examples() {
        use PairState::*;
        let x = exchange_gate(d_pair(), 0.5);
        assert!((apply(&x, S, S) + vec_of(S, S)).norm() < TOL);
        assert!((apply(&x, T0, S) - vec_of(T0, S)).norm() < TOL);
        assert!(max_abs(&(exchange_gate(d_pair(), 1.0).into_matrix() - Matrix::identity(16, 16))) < TOL);
        assert!(max_abs(&(x.into_matrix() - swap_oracle(0, 1))) < TOL);
    }

    #[test]
    fn entangle_reductions() {
        for &phi in &[0.13, 0.5, 0.871] {
            let u = entangle_gate(phi, 0.0);
            let x = exchange_gate(INTER_PAIR, phi);
            assert!(max_abs(&(u.matrix() - x.matrix())) < TOL);
            let u = entangle_gate(0.0, phi);
            let z = phase_gate(INTER_PAIR, phi);
            assert!(max_abs(&(u.matrix() - z.matrix())) < TOL);
        }
        let swap = entangle_gate(0.5, 0.0);
        assert!(max_abs(&(swap.into_matrix() - swap_oracle(1, 2))) < TOL);
    }

    #[test]
    fn entangle_parallel_block_is_identity() {
        let u = entangle_gate(0.31, 0.77);
        for idx in 0..16usize {
            let s1 = (idx >> 2) & 1;
            let s2 = (idx >> 1) & 1;
            if s1 == s2 {
                let col = u.matrix().column(idx).into_owned();
                let mut e = spin::Vector::zeros(16);
                e[idx] = C64::new(1.0, 0.0);
                assert!((col - e).norm() < TOL);
            }
        }
    }

    #[test]
    fn phase_and_exchange_do_not_commute() {
        let z = phase_generator(d_pair(), 0.3);
        let x = exchange_generator(d_pair(), 0.3);
        let comm = z.matrix() * x.matrix() - x.matrix() * z.matrix();
        assert!(max_abs(&comm) > 0.1);
    }

    #[test]
    fn pair_rotation_matches_generator_route() {
        let gates = [
            GateDescriptor::Phase { dqd: Dqd::D, phi: 0.173 },
            GateDescriptor::Phase { dqd: Dqd::A, phi: -0.61 },
            GateDescriptor::Exchange { dqd: Dqd::A, phi: 0.42 },
            GateDescriptor::Exchange { dqd: Dqd::D, phi: 1.7 },
            GateDescriptor::Entangle { phi: 0.5, psi: 3f64.sqrt() / 4.0 },
            GateDescriptor::Entangle { phi: 0.0, psi: 0.0 },
            GateDescriptor::Entangle { phi: 0.9, psi: -0.35 },
        ];
        for g in gates {
            let fast = g.pair_rotation().unwrap().to_matrix();
            assert!(max_abs(&(fast - g.unitary().into_matrix())) < TOL, "{g}");
        }
    }

    #[test]
    fn pair_rotation_apply_matches_matrix() {
        let r = PairRotation::new(INTER_PAIR, 0.3, 0.21);
        let psi = product_state(PairState::T0, PairState::S);
        let mut amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        r.apply(&mut amps);
        let expected = r.to_matrix() * psi.amplitudes();
        for (a, b) in amps.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn logical_operators_on_encoded_states() {
        use PairState::*;
        let tz = tau_z(Dqd::D);
        let out = tz.matrix() * product_state(S, S).amplitudes();
        assert!((out + vec_of(S, S)).norm() < TOL);
        assert!((tz.matrix() * product_state(TPlus, S).amplitudes()).norm() < TOL);

        let tx = tau_x(Dqd::A);
        let out = tx.matrix() * product_state(S, T0).amplitudes();
        assert!((out - vec_of(S, S)).norm() < TOL);

        let h = hadamard(Dqd::D);
        let expected = (vec_of(T0, S) - vec_of(S, S)) * C64::new(FRAC_1_SQRT_2, 0.0);
        assert!((apply(&h, S, S) - expected).norm() < TOL);
        let hh = spin::compose(&[h.clone(), h.clone()], 4).unwrap();
        assert!(max_abs(&(hh.into_matrix() - Matrix::identity(16, 16))) < TOL);
    }

    #[test]
    fn logical_operators_vanish_on_leakage() {
        use PairState::*;
        for dqd in [Dqd::D, Dqd::A] {
            for other in PairState::ALL {
                for leak in [TPlus, TMinus] {
                    let (d, a) = if dqd == Dqd::D { (leak, other) } else { (other, leak) };
                    let v = product_state(d, a);
                    assert!((tau_x(dqd).matrix() * v.amplitudes()).norm() < TOL);
                    assert!((tau_z(dqd).matrix() * v.amplitudes()).norm() < TOL);
                    assert!((hadamard(dqd).apply(&v).unwrap().amplitudes() - v.amplitudes()).norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn zz_gate_examples() {
        use PairState::*;
        assert!(max_abs(&(zz_gate(0.0).into_matrix() - Matrix::identity(16, 16))) < TOL);
        let zz = zz_gate(0.7);
        for a in PairState::ALL {
            assert!((apply(&zz, TPlus, a) - vec_of(TPlus, a)).norm() < TOL);
        }
        // τz^D τz^A = +1 on |S S⟩
        let expected = vec_of(S, S) * C64::from_polar(1.0, -0.7);
        assert!((apply(&zz, S, S) - expected).norm() < TOL);
    }

    #[test]
    fn every_gate_conserves_sz() {
        let gates = [
            GateDescriptor::Phase { dqd: Dqd::D, phi: 0.173 },
            GateDescriptor::Exchange { dqd: Dqd::A, phi: 0.42 },
            GateDescriptor::Entangle { phi: 0.31, psi: 0.77 },
            GateDescriptor::TauX { dqd: Dqd::D, theta: 1.1 },
            GateDescriptor::TauZ { dqd: Dqd::A, theta: 0.4 },
            GateDescriptor::Hadamard { dqd: Dqd::A },
            GateDescriptor::ZZ { theta: 0.9 },
        ];
        for g in gates {
            let u = g.unitary();
            assert!(u.unitarity_residual() < TOL, "{g}");
            assert!(check_sz_conservation(&u, 1e-12), "{g}");
        }
        assert!(check_sz_conservation(&sinl_longrange(), 1e-12));
    }

    #[test]
    fn periodicity() {
        for &phi in &[0.0, 0.2, 0.77] {
            let a = phase_gate(d_pair(), phi);
            let b = phase_gate(d_pair(), phi + 1.0);
            assert!(max_abs(&(a.matrix() - b.matrix())) < TOL);
            let a = exchange_gate(d_pair(), phi);
            let b = exchange_gate(d_pair(), phi + 1.0);
            assert!(max_abs(&(a.matrix() - b.matrix())) < TOL);
        }
    }

    #[test]
    fn entangle_block_form() {
        // on {↑↓, ↓↑} of (QD₂,QD₃): e^{iπφ} exp(−i2π[(φ/2)X + ψZ])
        let (phi, psi) = (0.37, 0.12);
        let u = entangle_gate(phi, psi);
        let px = Matrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let pz = Matrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let h = HermitianGenerator::new((px * c(phi / 2.0) + pz * c(psi)) * c(2.0 * PI)).unwrap();
        let block = exp_generator(&h).into_matrix() * C64::from_polar(1.0, PI * phi);
        // ↑↓ on spins 1,2 with spins 0,3 down: index 0b0100; ↓↑: 0b0010
        let idx = [0b0100, 0b0010];
        for r in 0..2 {
            for col in 0..2 {
                assert!((u.matrix()[(idx[r], idx[col])] - block[(r, col)]).norm() < TOL);
            }
        }
    }

    #[test]
    fn longrange_passes_only_with_hermitian_tau_x() {
        let (_, residual) = sinl_longrange_literal();
        assert!(residual > 0.1);
        assert!(sinl_longrange().unitarity_residual() < TOL);
    }

    #[test]
    fn descriptor_text_round_trip() {
        let text = "X(D,0.5)\nZ(A,0.25)\nU(0.5,0.4330127)\nH(D)\nZZ(0.7853982)\nTX(A,2.356194490192345)\nTZ(D,-1.5)\n";
        let gates = parse_sequence(text).unwrap();
        assert_eq!(gates.len(), 7);
        assert_eq!(format_sequence(&gates), text);
        assert_eq!(gates[2], GateDescriptor::Entangle { phi: 0.5, psi: 0.4330127 });
    }

    #[test]
    fn parse_comments_and_errors() {
        let gates = parse_sequence("# header\n\n  U(0.5, 0) # swap\n").unwrap();
        assert_eq!(gates, vec![GateDescriptor::Entangle { phi: 0.5, psi: 0.0 }]);
        for bad in ["Q(D,1)", "X(B,0.5)", "X(D)", "U(0.5,x)", "H(D", "X(D,inf)"] {
            assert!(parse_sequence(bad).is_err(), "{bad}");
        }
        let err = parse_sequence("X(D,0.1)\nX(D,oops)").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn reduced_keeps_unitary() {
        let gates = [
            GateDescriptor::Phase { dqd: Dqd::D, phi: 1.345073936796977 },
            GateDescriptor::Exchange { dqd: Dqd::A, phi: -0.25 },
            GateDescriptor::Entangle { phi: 2.5, psi: 0.0 },
            GateDescriptor::Entangle { phi: 0.0, psi: -0.75 },
            GateDescriptor::Entangle { phi: 1.2, psi: 0.3 },
        ];
        for g in gates {
            let r = g.reduced();
            let (eq, _) = equal_up_to_global_phase(&r.unitary(), &g.unitary(), 1e-9);
            assert!(eq, "{g} -> {r}");
        }
        match (GateDescriptor::Phase { dqd: Dqd::D, phi: 1.345073936796977 }).reduced() {
            GateDescriptor::Phase { phi, .. } => assert!((phi - 0.345073936796977).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn swap_decomposition_up_to_block_phase() {
        let c = decomposition_check();
        assert!(c.antiparallel_deviation < 1e-10, "{c:?}");
        assert!(c.parallel_deviation < 1e-10, "{c:?}");
        let expected = PI / 2.0 + PI * FRAC_1_SQRT_2;
        let diff = (c.antiparallel_phase - expected).rem_euclid(2.0 * PI);
        assert!(diff.min(2.0 * PI - diff) < 1e-10, "{c:?}");
    }
}
