//! Fermionic Fock-space engine for six spin-orbital modes.
//!
//! Modes are ordered (1↑, 1↓, 2↑, 2↓, 3↑, 3↓): orbital `k ∈ {1,2,3}` and spin
//! map to mode index `2(k-1) + spin`. States are occupation bitmasks and all
//! operator signs follow the Jordan-Wigner rule on this fixed order: applying
//! `c†_m`/`c_m` picks up `(-1)^(occupied modes below m)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Number of spin-orbital modes (three orbitals, two spins).
pub const MODE_COUNT: usize = 6;

/// Dimension of the full Fock space.
pub const FULL_DIM: usize = 1 << MODE_COUNT;

/// Tolerance used when verifying Hermiticity of assembled operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("mode index {0} out of range (must be < {MODE_COUNT})")]
    ModeOutOfRange(usize),
    #[error("bit pattern {0:#08b} uses modes beyond the six available")]
    InvalidBits(u8),
    #[error("particle number {0} out of range (must be ≤ {MODE_COUNT})")]
    ParticleNumberOutOfRange(u32),
    #[error("empty sector: no state has N={n:?}, 2Sz={two_sz:?}")]
    EmptySector { n: Option<u32>, two_sz: Option<i32> },
    #[error("assembled operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator dimension {found} does not match basis length {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver failed to converge (dim {dim}, ‖H‖ = {norm:.3e})")]
    EigenFailure { dim: usize, norm: f64 },
    #[error("operation requires a Hermitian operator (flag not set)")]
    HermitianRequired,
}

/// Spin projection of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Mode index of orbital `k ∈ {1,2,3}` with the given spin.
pub fn mode_index(orbital: usize, spin: Spin) -> usize {
    assert!((1..=3).contains(&orbital), "orbital must be 1, 2 or 3");
    2 * (orbital - 1)
        + match spin {
            Spin::Up => 0,
            Spin::Down => 1,
        }
}

/// Occupation-number state of the six modes, one bit per mode.
///
/// Bit `m` set means mode `m` is occupied. The canonical ket is the ordered
/// product of creation operators with ascending mode index applied to the
/// vacuum.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(u8);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    /// State from a raw bit pattern (bits 0..6).
    pub fn from_bits(bits: u8) -> Result<Self, FockError> {
        if usize::from(bits) >= FULL_DIM {
            return Err(FockError::InvalidBits(bits));
        }
        Ok(FockState(bits))
    }

    /// State with exactly the given modes occupied.
    pub fn from_modes(modes: &[usize]) -> Result<Self, FockError> {
        let mut bits = 0u8;
        for &m in modes {
            if m >= MODE_COUNT {
                return Err(FockError::ModeOutOfRange(m));
            }
            bits |= 1 << m;
        }
        Ok(FockState(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_occupied(self, mode: usize) -> bool {
        self.0 & (1 << mode) != 0
    }

    /// Total particle number N.
    pub fn particle_number(self) -> u32 {
        self.0.count_ones()
    }

    /// Twice the spin projection, 2Sz = n↑ − n↓.
    pub fn two_sz(self) -> i32 {
        let up = (self.0 & 0b010101).count_ones() as i32;
        let down = (self.0 & 0b101010).count_ones() as i32;
        up - down
    }

    /// Electrons per orbital, `[n1, n2, n3]`.
    pub fn occupancy(self) -> [u8; 3] {
        let mut occ = [0u8; 3];
        for (k, slot) in occ.iter_mut().enumerate() {
            *slot = ((self.0 >> (2 * k)) & 0b11).count_ones() as u8;
        }
        occ
    }

    /// For a singly occupied orbital, the spin of its electron.
    pub fn orbital_spin(self, orbital: usize) -> Option<Spin> {
        let up = self.is_occupied(mode_index(orbital, Spin::Up));
        let down = self.is_occupied(mode_index(orbital, Spin::Down));
        match (up, down) {
            (true, false) => Some(Spin::Up),
            (false, true) => Some(Spin::Down),
            _ => None,
        }
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for m in 0..MODE_COUNT {
            write!(f, "{}", u8::from(self.is_occupied(m)))?;
        }
        write!(f, "⟩")
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Parity sign `(-1)^(occupied modes below `mode`)`.
fn jw_sign(state: FockState, mode: usize) -> i32 {
    let below = state.0 & ((1u8 << mode) - 1);
    if below.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Apply `c†_mode`. Returns `None` when the mode is already occupied.
pub fn apply_creation(mode: usize, state: FockState) -> Option<(i32, FockState)> {
    assert!(mode < MODE_COUNT, "mode index out of range");
    if state.is_occupied(mode) {
        return None;
    }
    Some((jw_sign(state, mode), FockState(state.0 | (1 << mode))))
}

/// Apply `c_mode`. Returns `None` when the mode is empty.
pub fn apply_annihilation(mode: usize, state: FockState) -> Option<(i32, FockState)> {
    assert!(mode < MODE_COUNT, "mode index out of range");
    if !state.is_occupied(mode) {
        return None;
    }
    Some((jw_sign(state, mode), FockState(state.0 & !(1 << mode))))
}

/// Ordered basis of a symmetry sector of the Fock space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    states: Vec<FockState>,
    index: Vec<Option<u32>>,
    particle_number: Option<u32>,
    two_sz: Option<i32>,
}

/// Enumerate every state compatible with the requested sector, in ascending
/// bit-pattern order.
///
/// `two_sz` is twice the spin projection so half-integers stay exact.
pub fn build_basis(particle_number: Option<u32>, two_sz: Option<i32>) -> Result<FockBasis, FockError> {
    if let Some(n) = particle_number {
        if n > MODE_COUNT as u32 {
            return Err(FockError::ParticleNumberOutOfRange(n));
        }
    }
    let states: Vec<FockState> = (0..FULL_DIM as u8)
        .map(FockState)
        .filter(|s| particle_number.is_none_or(|n| s.particle_number() == n))
        .filter(|s| two_sz.is_none_or(|z| s.two_sz() == z))
        .collect();
    if states.is_empty() {
        return Err(FockError::EmptySector {
            n: particle_number,
            two_sz,
        });
    }
    let mut index = vec![None; FULL_DIM];
    for (i, s) in states.iter().enumerate() {
        index[s.0 as usize] = Some(i as u32);
    }
    Ok(FockBasis {
        states,
        index,
        particle_number,
        two_sz,
    })
}

impl FockBasis {
    /// The unrestricted 64-state basis.
    pub fn full() -> FockBasis {
        build_basis(None, None).expect("full basis is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_at(&self, i: usize) -> FockState {
        self.states[i]
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.index[state.0 as usize].map(|i| i as usize)
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    /// Particle number of the sector, if constrained.
    pub fn particle_number(&self) -> Option<u32> {
        self.particle_number
    }

    /// Twice the sector spin projection, if constrained.
    pub fn two_sz(&self) -> Option<i32> {
        self.two_sz
    }
}

/// A single creation or annihilation operator in a product string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeOp {
    Create(usize),
    Annihilate(usize),
}

impl ModeOp {
    fn mode(self) -> usize {
        match self {
            ModeOp::Create(m) | ModeOp::Annihilate(m) => m,
        }
    }

    fn adjoint(self) -> ModeOp {
        match self {
            ModeOp::Create(m) => ModeOp::Annihilate(m),
            ModeOp::Annihilate(m) => ModeOp::Create(m),
        }
    }
}

/// One product term `coefficient × op_1 op_2 ⋯ op_n`.
///
/// Operators are written left to right and applied to kets right to left, as
/// in ordinary operator notation.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: Complex64,
    pub ops: Vec<ModeOp>,
}

impl Term {
    pub fn new(coefficient: impl Into<Complex64>, ops: Vec<ModeOp>) -> Term {
        Term {
            coefficient: coefficient.into(),
            ops,
        }
    }

    /// Number operator `n_mode`.
    pub fn number(coefficient: impl Into<Complex64>, mode: usize) -> Term {
        Term::new(coefficient, vec![ModeOp::Create(mode), ModeOp::Annihilate(mode)])
    }

    /// Hopping `c†_to c_from`.
    pub fn hopping(coefficient: impl Into<Complex64>, to: usize, from: usize) -> Term {
        Term::new(coefficient, vec![ModeOp::Create(to), ModeOp::Annihilate(from)])
    }

    /// Hermitian conjugate of this term.
    pub fn adjoint(&self) -> Term {
        Term {
            coefficient: self.coefficient.conj(),
            ops: self.ops.iter().rev().map(|op| op.adjoint()).collect(),
        }
    }

    /// Apply the operator string to a canonical state, tracking the sign.
    pub fn apply(&self, state: FockState) -> Option<(Complex64, FockState)> {
        let mut sign = 1i32;
        let mut current = state;
        for op in self.ops.iter().rev() {
            let (s, next) = match op {
                ModeOp::Create(m) => apply_creation(*m, current)?,
                ModeOp::Annihilate(m) => apply_annihilation(*m, current)?,
            };
            sign *= s;
            current = next;
        }
        Some((self.coefficient * f64::from(sign), current))
    }
}

/// Counts of contributions discarded during assembly because the image state
/// fell outside the basis sector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyReport {
    pub dropped_contributions: usize,
}

/// Dense complex operator over an explicit basis.
///
/// The Hermiticity flag is only set after verification; `eigh` refuses to run
/// without it.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
    hermitian: bool,
    basis: Option<Arc<FockBasis>>,
}

impl HermitianOperator {
    /// Wrap a matrix, verifying Hermiticity against [`HERMITICITY_TOL`]
    /// (scaled by the matrix magnitude).
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self, FockError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FockError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let deviation = hermiticity_deviation(&matrix);
        let scale = matrix.camax().max(1.0);
        if deviation > HERMITICITY_TOL * scale {
            return Err(FockError::NotHermitian { deviation });
        }
        Ok(HermitianOperator {
            matrix,
            hermitian: true,
            basis: None,
        })
    }

    /// Wrap a real symmetric matrix.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self, FockError> {
        Self::from_matrix(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    /// Wrap a matrix without claiming Hermiticity.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        HermitianOperator {
            matrix,
            hermitian: false,
            basis: None,
        }
    }

    pub fn with_basis(mut self, basis: Arc<FockBasis>) -> Result<Self, FockError> {
        if self.matrix.nrows() != basis.len() {
            return Err(FockError::DimensionMismatch {
                found: self.matrix.nrows(),
                expected: basis.len(),
            });
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn basis(&self) -> Option<&Arc<FockBasis>> {
        self.basis.as_ref()
    }

    /// Largest absolute entry, used to scale tolerances.
    pub fn magnitude(&self) -> f64 {
        self.matrix.camax()
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigh(&self) -> Result<Eigendecomposition, FockError> {
        if !self.hermitian {
            return Err(FockError::HermitianRequired);
        }
        let dim = self.dim();
        let se = self
            .matrix
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(FockError::EigenFailure {
                dim,
                norm: self.matrix.norm(),
            })?;
        // nalgebra does not order the eigenvalues
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut eigenvectors = DMatrix::<Complex64>::zeros(dim, dim);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(i));
        }
        Ok(Eigendecomposition {
            eigenvalues,
            eigenvectors,
        })
    }
}

/// Sorted eigenvalues with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

pub(crate) fn hermiticity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..matrix.nrows() {
        for j in i..matrix.ncols() {
            dev = dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    dev
}

fn assemble_matrix(
    terms: &[Term],
    basis: &FockBasis,
) -> Result<(DMatrix<Complex64>, AssemblyReport), FockError> {
    for term in terms {
        for op in &term.ops {
            if op.mode() >= MODE_COUNT {
                return Err(FockError::ModeOutOfRange(op.mode()));
            }
        }
    }
    let dim = basis.len();
    // triplet accumulation keeps repeated images exact before densifying
    let mut triplets: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    let mut dropped = 0usize;
    for (col, &state) in basis.states().iter().enumerate() {
        for term in terms {
            if let Some((amp, image)) = term.apply(state) {
                match basis.index_of(image) {
                    Some(row) => {
                        *triplets.entry((row, col)).or_insert(Complex64::ZERO) += amp;
                    }
                    None => dropped += 1,
                }
            }
        }
    }
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for ((row, col), amp) in triplets {
        matrix[(row, col)] = amp;
    }
    Ok((
        matrix,
        AssemblyReport {
            dropped_contributions: dropped,
        },
    ))
}

/// Assemble the sum of product terms as a matrix over `basis`.
///
/// Contributions mapping outside the sector are dropped and counted in the
/// report. No Hermiticity is claimed for the result.
pub fn assemble_operator(
    terms: &[Term],
    basis: &FockBasis,
) -> Result<(HermitianOperator, AssemblyReport), FockError> {
    let (matrix, report) = assemble_matrix(terms, basis)?;
    Ok((HermitianOperator::from_matrix_unchecked(matrix), report))
}

/// Assemble a term list the caller asserts is self-adjoint; the result is
/// verified Hermitian and the error names the deviation otherwise.
pub fn assemble_hermitian(
    terms: &[Term],
    basis: &FockBasis,
) -> Result<(HermitianOperator, AssemblyReport), FockError> {
    let (matrix, report) = assemble_matrix(terms, basis)?;
    let op = HermitianOperator::from_matrix(matrix)?;
    Ok((op, report))
}
