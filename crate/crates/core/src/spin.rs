//! Dense linear algebra on small spin registers.
//!
//! Basis states are indexed by spin-z bitstrings: spin `i` (quantum dot
//! `i + 1`) sits at bit `n - 1 - i` of the index, so the first spin is the
//! most significant bit. A set bit is spin up. `"↑↓"` is therefore index
//! `0b10`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Tolerance for unitarity checks on constructed operators.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for Hermiticity checks on generators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for state normalization.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn dim(n_spins: usize) -> usize {
    1usize << n_spins
}

/// Bit position of spin `site` inside a basis index.
#[inline]
pub fn bit_of(site: usize, n_spins: usize) -> usize {
    n_spins - 1 - site
}

/// Whether `site` is spin up in basis element `index`.
#[inline]
pub fn is_up(index: usize, site: usize, n_spins: usize) -> bool {
    (index >> bit_of(site, n_spins)) & 1 == 1
}

/// Twice the total s_z of a basis element (number of up spins minus down spins).
#[inline]
pub fn twice_sz(index: usize, n_spins: usize) -> i32 {
    let ups = (index & (dim(n_spins) - 1)).count_ones() as i32;
    2 * ups - n_spins as i32
}

/// Entrywise max-norm.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn dim_to_spins(d: usize) -> Option<usize> {
    if d == 0 || !d.is_power_of_two() {
        None
    } else {
        Some(d.trailing_zeros() as usize)
    }
}

/// Single-spin Pauli operators in the `{↓, ↑}` index order.
pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Matrix {
    // σʸ|↑⟩ = i|↓⟩, σʸ|↓⟩ = −i|↑⟩
    Matrix::from_row_slice(2, 2, &[ZERO, I, -I, ZERO])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

/// Heisenberg product σᵢ·σⱼ on two spins.
pub fn sigma_dot_sigma() -> Matrix {
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    x.kronecker(&x) + y.kronecker(&y) + z.kronecker(&z)
}

/// Normalized amplitude vector over an `n`-spin register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_spins: usize,
    amplitudes: Vector,
}

impl PureState {
    pub fn new(amplitudes: Vector) -> Result<Self> {
        let n_spins = dim_to_spins(amplitudes.len()).ok_or(Error::BadDimension {
            n_spins: 0,
            got: amplitudes.len(),
        })?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_spins, amplitudes })
    }

    /// Computational basis element `index`.
    pub fn basis(n_spins: usize, index: usize) -> Self {
        let mut amplitudes = Vector::zeros(dim(n_spins));
        amplitudes[index] = ONE;
        Self { n_spins, amplitudes }
    }

    pub(crate) fn from_vector_unchecked(amplitudes: Vector) -> Self {
        let n_spins = dim_to_spins(amplitudes.len()).expect("power-of-two length");
        Self { n_spins, amplitudes }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Tensor product with `self` on the leading spins.
    pub fn kron(&self, other: &PureState) -> PureState {
        PureState {
            n_spins: self.n_spins + other.n_spins,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// ⟨ψ|S_z^total|ψ⟩ in units of ħ.
    pub fn sz_expectation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * twice_sz(k, self.n_spins) as f64 / 2.0)
            .sum()
    }
}

fn parse_spin(c: char) -> Result<bool> {
    match c {
        '↑' | 'u' | 'U' | '1' => Ok(true),
        '↓' | 'd' | 'D' | '0' => Ok(false),
        other => Err(Error::InvalidSpin(other)),
    }
}

/// Product state from a spin string such as `"↑↓↑↓"`, checked against `n`.
pub fn basis_state(bits: &str, n: usize) -> Result<PureState> {
    let spins = bits.chars().map(parse_spin).collect::<Result<Vec<_>>>()?;
    if spins.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: spins.len(),
        });
    }
    let index = spins
        .iter()
        .fold(0usize, |acc, &up| (acc << 1) | usize::from(up));
    Ok(PureState::basis(n, index))
}

/// Unitary operator on an `n`-spin register.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    n_spins: usize,
    matrix: Matrix,
}

impl UnitaryOp {
    pub fn new(matrix: Matrix) -> Result<Self> {
        Self::with_tolerance(matrix, UNITARY_TOL)
    }

    pub fn with_tolerance(matrix: Matrix, tol: f64) -> Result<Self> {
        let n_spins = square_spins(&matrix)?;
        let residual = unitarity_residual(&matrix);
        if residual > tol {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Self { n_spins, matrix })
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(matrix: Matrix) -> Self {
        let n_spins = dim_to_spins(matrix.nrows()).expect("power-of-two dimension");
        Self { n_spins, matrix }
    }

    pub fn identity(n_spins: usize) -> Self {
        Self {
            n_spins,
            matrix: Matrix::identity(dim(n_spins), dim(n_spins)),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Max-norm of U†U − 1.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.n_spins != self.n_spins {
            return Err(Error::SizeMismatch {
                expected: self.n_spins,
                got: state.n_spins,
            });
        }
        Ok(PureState {
            n_spins: self.n_spins,
            amplitudes: &self.matrix * &state.amplitudes,
        })
    }

    /// Places this operator on `sites` of an `n`-spin register.
    pub fn embed(&self, sites: &[usize], n: usize) -> Result<Self> {
        Ok(Self {
            n_spins: n,
            matrix: embed_matrix(&self.matrix, sites, n)?,
        })
    }
}

/// Hermitian operator; `exp_generator` turns it into `exp(−iH)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianGenerator {
    n_spins: usize,
    matrix: Matrix,
}

impl HermitianGenerator {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let n_spins = square_spins(&matrix)?;
        let dev = max_abs(&(&matrix - matrix.adjoint()));
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { n_spins, matrix })
    }

    pub fn zero(n_spins: usize) -> Self {
        Self {
            n_spins,
            matrix: Matrix::zeros(dim(n_spins), dim(n_spins)),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    pub fn plus(&self, other: &HermitianGenerator) -> Result<Self> {
        if other.n_spins != self.n_spins {
            return Err(Error::SizeMismatch {
                expected: self.n_spins,
                got: other.n_spins,
            });
        }
        Ok(Self {
            n_spins: self.n_spins,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn embed(&self, sites: &[usize], n: usize) -> Result<Self> {
        Ok(Self {
            n_spins: n,
            matrix: embed_matrix(&self.matrix, sites, n)?,
        })
    }
}

/// Total S_z = Σᵢ σᶻᵢ/2.
pub fn total_sz(n_spins: usize) -> HermitianGenerator {
    let d = dim(n_spins);
    let matrix = Matrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(twice_sz(r, n_spins) as f64 / 2.0, 0.0)
        } else {
            ZERO
        }
    });
    HermitianGenerator { n_spins, matrix }
}

fn square_spins(matrix: &Matrix) -> Result<usize> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::BadDimension {
            n_spins: 0,
            got: matrix.ncols(),
        });
    }
    dim_to_spins(matrix.nrows()).ok_or(Error::BadDimension {
        n_spins: 0,
        got: matrix.nrows(),
    })
}

fn unitarity_residual(m: &Matrix) -> f64 {
    let d = m.nrows();
    max_abs(&(m.adjoint() * m - Matrix::identity(d, d)))
}

/// Acts as `local` on `sites` (first listed site is the most significant
/// local bit) and as the identity on every other spin.
pub fn embed_matrix(local: &Matrix, sites: &[usize], n: usize) -> Result<Matrix> {
    let k = sites.len();
    if local.nrows() != dim(k) || local.ncols() != dim(k) {
        return Err(Error::BadDimension {
            n_spins: k,
            got: local.nrows(),
        });
    }
    for (pos, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        if sites[..pos].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    let site_mask = sites
        .iter()
        .fold(0usize, |m, &s| m | (1 << bit_of(s, n)));
    let local_index = |full: usize| {
        sites
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | usize::from(is_up(full, s, n)))
    };
    let d = dim(n);
    Ok(Matrix::from_fn(d, d, |r, c| {
        if (r & !site_mask) != (c & !site_mask) {
            ZERO
        } else {
            local[(local_index(r), local_index(c))]
        }
    }))
}

/// `exp(−iH)` from the Hermitian eigendecomposition of `H`.
pub fn exp_generator(h: &HermitianGenerator) -> UnitaryOp {
    let eig = h.matrix.clone().symmetric_eigen();
    let phases = Vector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&lambda| C64::from_polar(1.0, -lambda)),
    );
    let v = &eig.eigenvectors;
    let matrix = v * Matrix::from_diagonal(&phases) * v.adjoint();
    UnitaryOp {
        n_spins: h.n_spins,
        matrix,
    }
}

/// Product of `gates` in temporal order: the first element acts first.
pub fn compose(gates: &[UnitaryOp], n_spins: usize) -> Result<UnitaryOp> {
    let mut acc = Matrix::identity(dim(n_spins), dim(n_spins));
    for g in gates {
        if g.n_spins != n_spins {
            return Err(Error::SizeMismatch {
                expected: n_spins,
                got: g.n_spins,
            });
        }
        acc = &g.matrix * acc;
    }
    Ok(UnitaryOp {
        n_spins,
        matrix: acc,
    })
}

/// Whether `u = e^{iθ} v` entrywise within `tol`; returns `θ` in (−π, π].
pub fn equal_up_to_global_phase(u: &UnitaryOp, v: &UnitaryOp, tol: f64) -> (bool, f64) {
    if u.matrix.shape() != v.matrix.shape() {
        return (false, 0.0);
    }
    let overlap = (v.matrix.adjoint() * &u.matrix).trace();
    let theta = if overlap.norm() > 1e-12 {
        overlap.arg()
    } else {
        // Trace vanished: fall back to the largest entry of v.
        let (idx, _) = v
            .matrix
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        (u.matrix.as_slice()[idx] / v.matrix.as_slice()[idx]).arg()
    };
    let residual = max_abs(&(&u.matrix - &v.matrix * C64::from_polar(1.0, theta)));
    (residual <= tol, theta)
}

/// Whether `v†u` is diagonal and constant on every total-s_z sector.
pub fn sector_phase_equivalent(u: &UnitaryOp, v: &UnitaryOp, tol: f64) -> bool {
    if u.matrix.shape() != v.matrix.shape() {
        return false;
    }
    let w = v.matrix.adjoint() * &u.matrix;
    let n = u.n_spins;
    let d = dim(n);
    let mut sector_phase: Vec<Option<C64>> = vec![None; n + 1];
    for r in 0..d {
        for c in 0..d {
            if r != c && w[(r, c)].norm() > tol {
                return false;
            }
        }
        let sector = (r.count_ones()) as usize;
        match sector_phase[sector] {
            None => sector_phase[sector] = Some(w[(r, r)]),
            Some(p) if (w[(r, r)] - p).norm() > tol => return false,
            Some(_) => {}
        }
    }
    true
}

/// Max-norm of [U, S_z^total].
pub fn sz_commutator_residual(u: &UnitaryOp) -> f64 {
    let n = u.n_spins;
    let d = dim(n);
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let gap = (twice_sz(c, n) - twice_sz(r, n)) as f64 / 2.0;
            worst = worst.max((u.matrix[(r, c)] * gap).norm());
        }
    }
    worst
}

pub fn check_sz_conservation(u: &UnitaryOp, tol: f64) -> bool {
    sz_commutator_residual(u) <= tol
}
