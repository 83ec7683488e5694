//! CPTP maps as explicit Kraus sets.
//!
//! The total depolarizing channel D_t(rho) = t*rho + (1-t)*Tr(rho)*I/d comes in
//! two constructions: the plain form, and the square-root split D_sqrt(t) whose
//! two-fold composition reproduces D_t. Channels always carry their full Kraus
//! list, even where an affine closed form exists, so that the brute-force
//! verifier and the switch builder consume one representation.

use crate::error::{Error, Result};
use crate::qmath::{pauli_basis, ComplexMatrix, Complex64, DensityMatrix};

/// Completeness defect tolerance when constructing a channel.
pub const TOL_COMPLETENESS: f64 = 1e-12;

/// State-preservation probability t in [0, 1]; the noise strength is 1 - t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    t: f64,
}

impl NoiseParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !t.is_finite() {
            return Err(Error::NoiseParameter(t));
        }
        Ok(Self { t })
    }

    pub fn from_noise_strength(s: f64) -> Result<Self> {
        Self::new(1.0 - s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn noise_strength(&self) -> f64 {
        1.0 - self.t
    }
}

/// A channel given by an ordered Kraus list satisfying sum K†K = I.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    /// Rejects mismatched dimensions and completeness defects beyond tolerance.
    pub fn new(dim: usize, ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        for op in &ops {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: op.rows(),
                });
            }
            if !op.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let ch = Self {
            dim,
            ops,
            label: label.into(),
        };
        let defect = ch.completeness_defect();
        if defect > TOL_COMPLETENESS {
            return Err(Error::KrausCompleteness(defect));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    /// Single-operator channel rho -> U rho U†.
    pub fn unitary(u: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = u.rows();
        Self::new(dim, vec![u], label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest entry of |sum K†K - I|.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            acc = &acc + &(&k.dagger() * k);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }
}

/// Affine closed form of the total depolarizing channel.
pub fn depolarize(rho: &DensityMatrix, t: NoiseParams) -> DensityMatrix {
    let d = rho.dim();
    let tr = rho.mat().trace();
    let mixed = ComplexMatrix::identity(d).scale(tr * Complex64::new((1.0 - t.t()) / d as f64, 0.0));
    let out = &rho.mat().scale_re(t.t()) + &mixed;
    DensityMatrix::new(out).expect("depolarizing output is a valid state")
}

/// Kraus set for the depolarizing channel on d = 2^n.
///
/// With `sqrt_split` set this is the square-root factor D_sqrt(t), whose Kraus
/// operators are K_0 = t^(1/4) I and K_i = sqrt((1-sqrt(t))/d²) U_i over the
/// full Pauli-string basis; applied twice it equals D_t. Without the flag the
/// analogous plain set K_0 = sqrt(t) I, K_i = sqrt((1-t)/d²) U_i realizes D_t
/// directly. Index 0 is always the weighted identity operator.
///
/// The 1/d² under the square root is forced by completeness: the d² basis
/// strings each contribute U_i†U_i = I, so sum K†K = t I + (1-t) I only with
/// these weights, and the basis sum then twirls the state exactly onto
/// (1-t) Tr(ρ) I/d. Construction re-verifies the relation numerically.
pub fn depolarizing_kraus(t: NoiseParams, sqrt_split: bool, d: usize) -> Result<KrausChannel> {
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::SearchDimension(d));
    }
    let n = d.trailing_zeros() as usize;
    let basis = pauli_basis(n)?;
    let (id_weight, basis_weight, label) = if sqrt_split {
        let s = t.t().sqrt();
        (
            t.t().powf(0.25),
            ((1.0 - s) / (d * d) as f64).sqrt(),
            format!("D_sqrt(t={})", t.t()),
        )
    } else {
        (
            t.t().sqrt(),
            ((1.0 - t.t()) / (d * d) as f64).sqrt(),
            format!("D(t={})", t.t()),
        )
    };
    let mut ops = Vec::with_capacity(basis.len() + 1);
    ops.push(ComplexMatrix::identity(d).scale_re(id_weight));
    for u in basis.ops() {
        ops.push(u.scale_re(basis_weight));
    }
    KrausChannel::new(d, ops, label)
}

/// sum_i K_i rho K_i†.
pub fn apply_kraus(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            actual: rho.dim(),
        });
    }
    let mut acc = ComplexMatrix::zeros(ch.dim(), ch.dim());
    for k in ch.ops() {
        acc = &acc + &rho.mat().conjugate_with(k);
    }
    DensityMatrix::new(acc)
}

/// Sequential composition outer ∘ inner as the product Kraus set {K_i K_j}.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.dim(),
            actual: inner.dim(),
        });
    }
    let mut ops = Vec::with_capacity(outer.ops().len() * inner.ops().len());
    for ko in outer.ops() {
        for ki in inner.ops() {
            ops.push(ko * ki);
        }
    }
    KrausChannel::new(
        outer.dim(),
        ops,
        format!("{} . {}", outer.label(), inner.label()),
    )
}
