//! Dense complex-matrix kernel.
//!
//! Row-major storage, no sparsity: every operator in this crate lives in a
//! Hilbert space of dimension at most `2^k * d = 1024`, so dense `f64`
//! arithmetic is both simplest and fastest. The module provides construction,
//! products, Kronecker products, traces, block traces, Hermiticity/positivity
//! checks and the orthonormal unitary operator basis built from Pauli strings.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Hermiticity tolerance for validated states and operators.
pub const TOL_HERMITIAN: f64 = 1e-12;
/// Trace tolerance for normalized states.
pub const TOL_TRACE: f64 = 1e-12;
/// Positive-semidefiniteness tolerance (eigenvalues may dip this far below 0).
pub const TOL_PSD: f64 = 1e-10;

#[inline]
fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        let m = Self { rows, cols, entries };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                entries.push(f(r, col));
            }
        }
        Self { rows, cols, entries }
    }

    /// Outer product |v⟩⟨w| of two coefficient vectors.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, col| v[r] * w[col].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, col: usize) -> Complex64 {
        self.entries[r * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, r: usize, col: usize, v: Complex64) {
        self.entries[r * self.cols + col] = v;
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self.get(col, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `self` from its own conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for col in r..self.cols {
                let d = (self.get(r, col) - self.get(col, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, col| {
            (self.get(r, col) + self.get(col, r).conj()) * c(0.5, 0.0)
        })
    }

    /// Hilbert-Schmidt inner product Tr(self† other).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// A*B*A†.
    pub fn conjugate_with(&self, a: &Self) -> Self {
        a * &(self * &a.dagger())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, col): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + col]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for col in 0..self.cols {
                let z = self.get(r, col);
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        // Fixed summation order keeps results bit-stable across runs.
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for col in 0..rhs.cols {
                    let v = out.get(r, col) + a * rhs.get(k, col);
                    out.set(r, col, v);
                }
            }
        }
        out
    }
}

/// Kronecker product; the left factor is the slow (outer) index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let av = a.get(ar, ac);
            if av == Complex64::ZERO {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out.set(ar * b.rows() + br, ac * b.cols() + bc, av * b.get(br, bc));
                }
            }
        }
    }
    out
}

/// Real eigenvalues of a (numerically) Hermitian matrix, ascending.
///
/// The input is symmetrized as (M + M†)/2 first so that round-off asymmetry
/// cannot leak into the decomposition.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let h = m.hermitian_part();
    let n = h.rows();
    let na = nalgebra::DMatrix::from_fn(n, n, |r, col| h.get(r, col));
    let mut vals: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at the module tolerances.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = mat.hermiticity_defect();
        if defect > TOL_HERMITIAN {
            return Err(Error::NotHermitian(defect));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidTrace(tr.re));
        }
        let eigs = hermitian_eigenvalues(&mat)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(Self { dim: mat.rows(), mat })
    }

    /// Pure state |v⟩⟨v| from a normalized coefficient vector.
    pub fn from_pure(v: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(v, v))
    }

    /// |i⟩⟨i| in the computational basis.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::MarkedIndex { marked: index, dim });
        }
        let mut v = vec![Complex64::ZERO; dim];
        v[index] = Complex64::ONE;
        Self::from_pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            dim,
            mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// ⟨i|rho|i⟩ as a real probability.
    pub fn probability_at(&self, index: usize) -> f64 {
        self.mat.get(index, index).re
    }

    /// U rho U† for a unitary U, revalidated.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: u.cols(),
            });
        }
        Self::new(self.mat.conjugate_with(u))
    }
}

/// Orthonormal unitary operator basis {U_i} for d = 2^n: the n-fold Pauli
/// strings, with the identity string first. Satisfies Tr(U_i† U_j) = d δ_ij.
#[derive(Debug, Clone)]
pub struct UnitaryBasis {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl UnitaryBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn op(&self, i: usize) -> &ComplexMatrix {
        &self.ops[i]
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }
}

fn pauli_1q() -> [ComplexMatrix; 4] {
    let i2 = ComplexMatrix::identity(2);
    let x = ComplexMatrix::from_fn(2, 2, |r, col| if r != col { Complex64::ONE } else { Complex64::ZERO });
    let y = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => Complex64::ZERO,
    });
    let z = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
        (0, 0) => Complex64::ONE,
        (1, 1) => c(-1.0, 0.0),
        _ => Complex64::ZERO,
    });
    [i2, x, y, z]
}

/// All 4^n Pauli strings on n qubits, identity string first.
pub fn pauli_basis(n: usize) -> Result<UnitaryBasis> {
    if !(1..=6).contains(&n) {
        return Err(Error::QubitCount(n, 1, 6));
    }
    let single = pauli_1q();
    let count = 4usize.pow(n as u32);
    let mut ops = Vec::with_capacity(count);
    for idx in 0..count {
        // Base-4 digits, most significant first, so index 0 is I⊗...⊗I.
        let mut op = ComplexMatrix::identity(1);
        let mut rem = idx;
        let mut digits = vec![0usize; n];
        for d in (0..n).rev() {
            digits[d] = rem % 4;
            rem /= 4;
        }
        for &digit in &digits {
            op = kron(&op, &single[digit]);
        }
        ops.push(op);
    }
    Ok(UnitaryBasis { dim: 1 << n, ops })
}

/// (1/d²) Σ_i U_i rho U_i†, which equals Tr(rho) I_d/d for any input.
pub fn twirl(rho: &ComplexMatrix, basis: &UnitaryBasis) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::NotSquare(rho.rows(), rho.cols()));
    }
    if rho.rows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: rho.rows(),
        });
    }
    let mut acc = ComplexMatrix::zeros(rho.rows(), rho.cols());
    for u in basis.ops() {
        acc = &acc + &rho.conjugate_with(u);
    }
    Ok(acc.scale_re(1.0 / (basis.len() as f64)))
}

/// Hermitian operator on a register of k control qubits and one d-dimensional
/// system, stored as a 2^k x 2^k grid of d x d system blocks. The newest
/// control qubit is the outermost (slowest) tensor factor; the system is the
/// innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    block_dim: usize,
    levels: usize,
    mat: ComplexMatrix,
}

impl BlockState {
    pub fn new(mat: ComplexMatrix, block_dim: usize) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let dim = mat.rows();
        if block_dim == 0 || !dim.is_multiple_of(block_dim) || !(dim / block_dim).is_power_of_two() {
            return Err(Error::BadBlockDimension(dim, block_dim));
        }
        let defect = mat.hermiticity_defect();
        if defect > TOL_HERMITIAN {
            return Err(Error::NotHermitian(defect));
        }
        let levels = (dim / block_dim).trailing_zeros() as usize;
        Ok(Self { block_dim, levels, mat })
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Grid side length 2^levels.
    pub fn grid(&self) -> usize {
        1 << self.levels
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.block_dim;
        ComplexMatrix::from_fn(d, d, |r, col| self.mat.get(i * d + r, j * d + col))
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &ComplexMatrix) {
        let d = self.block_dim;
        debug_assert_eq!(b.rows(), d);
        for r in 0..d {
            for col in 0..d {
                self.mat.set(i * d + r, j * d + col, b.get(r, col));
            }
        }
    }

    /// Applies U B U† to every system block.
    pub fn conjugate_blocks(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.block_dim {
            return Err(Error::DimensionMismatch {
                expected: self.block_dim,
                actual: u.rows(),
            });
        }
        let g = self.grid();
        let mut out = Self {
            block_dim: self.block_dim,
            levels: self.levels,
            mat: ComplexMatrix::zeros(self.dim(), self.dim()),
        };
        for i in 0..g {
            for j in 0..g {
                out.set_block(i, j, &self.block(i, j).conjugate_with(u));
            }
        }
        Ok(out)
    }
}

/// Per-block trace: collapses each d x d block to its scalar trace, producing
/// a 2^k x 2^k matrix. A zero-level state collapses to the 1x1 total trace.
pub fn block_trace(state: &BlockState) -> ComplexMatrix {
    let g = state.grid();
    let d = state.block_dim();
    ComplexMatrix::from_fn(g, g, |i, j| {
        (0..d).map(|r| state.mat().get(i * d + r, j * d + r)).sum()
    })
}

/// Traces out the outermost control qubit; the result has one level fewer.
pub fn partial_trace_last_qubit(state: &BlockState) -> Result<BlockState> {
    if state.levels() == 0 {
        return Err(Error::NoControls);
    }
    let half = state.dim() / 2;
    let m = state.mat();
    let out = ComplexMatrix::from_fn(half, half, |r, col| {
        m.get(r, col) + m.get(half + r, half + col)
    });
    BlockState::new(out, state.block_dim())
}

/// Least-squares fit of `m` onto span{a, b} with real coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Span2Fit {
    pub alpha: f64,
    pub beta: f64,
    /// Largest elementwise magnitude of m - alpha*a - beta*b.
    pub residual: f64,
}

/// Projects a Hermitian matrix onto the real span of two Hermitian matrices.
pub fn span2_fit(m: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> Span2Fit {
    let gaa = a.hs_inner(a).re;
    let gab = a.hs_inner(b).re;
    let gbb = b.hs_inner(b).re;
    let ga = a.hs_inner(m).re;
    let gb = b.hs_inner(m).re;
    let det = gaa * gbb - gab * gab;
    let (alpha, beta) = if det.abs() < 1e-300 {
        (ga / gaa, 0.0)
    } else {
        ((ga * gbb - gb * gab) / det, (gb * gaa - ga * gab) / det)
    };
    let fit = &(&a.scale_re(alpha) + &b.scale_re(beta)) - m;
    Span2Fit {
        alpha,
        beta,
        residual: fit.max_abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        ComplexMatrix::from_fn(dim, dim, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        random_matrix(dim, seed).hermitian_part()
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        let p0 = DensityMatrix::basis_projector(2, 0).unwrap();
        let p1 = DensityMatrix::basis_projector(2, 1).unwrap();
        let k = kron(p0.mat(), p1.mat());
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == 1 && col == 1 { 1.0 } else { 0.0 };
                assert!((k.get(r, col) - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_conjugation_matches_direct_arithmetic() {
        let [_, x, _, _] = pauli_1q();
        let xx = kron(&x, &x);
        let rho = random_hermitian(4, 7);
        let via_kron = rho.conjugate_with(&xx).conjugate_with(&xx);
        // XX is an involution, so conjugating twice must return the input.
        assert!(via_kron.max_abs_diff(&rho) < 1e-12);
        // And one application agrees with explicit 4x4 products.
        let lhs = &(&xx * &rho) * &xx.dagger();
        assert!(lhs.max_abs_diff(&rho.conjugate_with(&xx)) < 1e-15);
    }

    #[test]
    fn pauli_basis_single_qubit() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        let i2 = ComplexMatrix::identity(2);
        assert!(basis.op(0).max_abs_diff(&i2) < 1e-15);
        for i in 0..4 {
            let u = basis.op(i);
            assert!((&u.dagger() * u).max_abs_diff(&i2) < 1e-15, "U_{i} not unitary");
            for j in 0..4 {
                // Tr(U_i† U_j) = d δ_ij under the Hilbert-Schmidt inner product.
                let inner = u.hs_inner(basis.op(j));
                let want = if i == j { 2.0 } else { 0.0 };
                assert!(
                    (inner - c(want, 0.0)).norm() < 1e-12,
                    "orthogonality failed at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn pauli_basis_counts_and_range() {
        assert_eq!(pauli_basis(2).unwrap().len(), 16);
        assert_eq!(pauli_basis(2).unwrap().dim(), 4);
        assert!(pauli_basis(0).is_err());
        assert!(pauli_basis(7).is_err());
    }

    #[test]
    fn twirl_collapses_to_maximally_mixed() {
        for n in 1..=4usize {
            let basis = pauli_basis(n).unwrap();
            let d = basis.dim();
            let v = random_matrix(d, 11 + n as u64);
            let out = twirl(&v, &basis).unwrap();
            let want = ComplexMatrix::identity(d).scale(v.trace() / c(d as f64, 0.0));
            assert!(out.max_abs_diff(&want) < 1e-12, "twirl identity failed at n={n}");
        }
    }

    #[test]
    fn basis_expansion_reconstructs_any_operator() {
        for n in 1..=4usize {
            let basis = pauli_basis(n).unwrap();
            let d = basis.dim();
            let v = random_matrix(d, 23 + n as u64);
            let mut acc = ComplexMatrix::zeros(d, d);
            for u in basis.ops() {
                // Tr(U† V) is the Hilbert-Schmidt inner product <U, V>.
                acc = &acc + &u.scale(u.hs_inner(&v));
            }
            let rebuilt = acc.scale_re(1.0 / d as f64);
            assert!(rebuilt.max_abs_diff(&v) < 1e-12, "expansion failed at n={n}");
        }
    }

    #[test]
    fn twirl_fixed_points() {
        let basis = pauli_basis(1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = twirl(mixed.mat(), &basis).unwrap();
        assert!(out.max_abs_diff(mixed.mat()) < 1e-15);

        let p0 = DensityMatrix::basis_projector(2, 0).unwrap();
        let out = twirl(p0.mat(), &basis).unwrap();
        assert!(out.max_abs_diff(mixed.mat()) < 1e-15);

        let z = &pauli_1q()[3];
        let out = twirl(z, &basis).unwrap();
        assert!(out.max_abs() < 1e-15, "traceless input must twirl to zero");
    }

    #[test]
    fn block_trace_factorized_state() {
        let rho = random_hermitian(4, 3);
        let ctrl = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let joint = BlockState::new(kron(ctrl.mat(), &rho), 4).unwrap();
        let bt = block_trace(&joint);
        let want = ctrl.mat().scale(rho.trace());
        assert!(bt.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn block_trace_maximally_mixed_and_level_zero() {
        let mm = DensityMatrix::maximally_mixed(8);
        let state = BlockState::new(mm.mat().clone(), 4).unwrap();
        assert_eq!(state.levels(), 1);
        let bt = block_trace(&state);
        assert!(bt.max_abs_diff(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-15);

        let flat = BlockState::new(mm.mat().clone(), 8).unwrap();
        assert_eq!(flat.levels(), 0);
        let bt = block_trace(&flat);
        assert_eq!(bt.rows(), 1);
        assert!((bt.get(0, 0) - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn block_trace_preserves_total_trace() {
        let m = random_hermitian(16, 5);
        let state = BlockState::new(m.clone(), 4).unwrap();
        let bt = block_trace(&state);
        assert!((bt.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = random_hermitian(4, 9);
        let plus = DensityMatrix::from_pure(&[
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let joint = BlockState::new(kron(plus.mat(), &rho), 4).unwrap();
        let reduced = partial_trace_last_qubit(&joint).unwrap();
        assert_eq!(reduced.levels(), 0);
        assert!(reduced.mat().max_abs_diff(&rho) < 1e-12);

        let mm = BlockState::new(DensityMatrix::maximally_mixed(8).mat().clone(), 4).unwrap();
        let reduced = partial_trace_last_qubit(&mm).unwrap();
        assert!(reduced
            .mat()
            .max_abs_diff(DensityMatrix::maximally_mixed(4).mat())
            < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let m = random_hermitian(16, 13);
        let state = BlockState::new(m, 4).unwrap();
        assert_eq!(state.levels(), 2);
        let reduced = partial_trace_last_qubit(&state).unwrap();
        assert!((reduced.mat().trace() - state.mat().trace()).norm() < 1e-12);
        assert!(partial_trace_last_qubit(
            &BlockState::new(random_hermitian(4, 1), 4).unwrap()
        )
        .is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let not_herm = ComplexMatrix::from_fn(2, 2, |r, col| {
            if r == 0 && col == 1 { c(0.3, 0.1) } else if r == col { c(0.5, 0.0) } else { Complex64::ZERO }
        });
        assert!(matches!(DensityMatrix::new(not_herm), Err(Error::NotHermitian(_))));

        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidTrace(_))));

        let not_psd = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 0) => c(1.5, 0.0),
            (1, 1) => c(-0.5, 0.0),
            _ => Complex64::ZERO,
        });
        assert!(matches!(
            DensityMatrix::new(not_psd),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }

    #[test]
    fn hermitian_eigenvalues_diagonal_case() {
        let m = ComplexMatrix::from_fn(3, 3, |r, col| {
            if r == col { c([2.0, -1.0, 0.5][r], 0.0) } else { Complex64::ZERO }
        });
        let eig = hermitian_eigenvalues(&m).unwrap();
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 0.5).abs() < 1e-12);
        assert!((eig[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn span2_fit_recovers_coefficients() {
        let a = random_hermitian(4, 21);
        let b = ComplexMatrix::identity(4).scale_re(0.25);
        let m = &a.scale_re(0.3) + &b.scale_re(0.7);
        let fit = span2_fit(&m, &a, &b);
        assert!((fit.alpha - 0.3).abs() < 1e-10);
        assert!((fit.beta - 0.7).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    proptest! {
        #[test]
        fn prop_kron_mixed_product(seed in 0u64..512) {
            let a = random_matrix(2, seed);
            let b = random_matrix(2, seed.wrapping_add(1));
            let cc = random_matrix(2, seed.wrapping_add(2));
            let d = random_matrix(2, seed.wrapping_add(3));
            let lhs = &kron(&a, &b) * &kron(&cc, &d);
            let rhs = kron(&(&a * &cc), &(&b * &d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn prop_kron_associative(seed in 0u64..512) {
            let a = random_matrix(2, seed.wrapping_add(100));
            let b = random_matrix(2, seed.wrapping_add(200));
            let cc = random_matrix(2, seed.wrapping_add(300));
            let lhs = kron(&kron(&a, &b), &cc);
            let rhs = kron(&a, &kron(&b, &cc));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn prop_twirl_identity(n in 1usize..3, seed in 0u64..256) {
            let basis = pauli_basis(n).unwrap();
            let d = basis.dim();
            let v = random_matrix(d, seed);
            let out = twirl(&v, &basis).unwrap();
            let want = ComplexMatrix::identity(d).scale(v.trace() / c(d as f64, 0.0));
            prop_assert!(out.max_abs_diff(&want) < 1e-12);
        }
    }
}
