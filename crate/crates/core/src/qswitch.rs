//! The quantum switch: two channels applied in a coherently controlled order.
//!
//! A control qubit sqrt(θ)|0⟩ + sqrt(1-θ)|1⟩ selects which channel acts first;
//! the joint Kraus operators combine both orders, and measuring the control in
//! the |±⟩ basis with post-selection on |+⟩ yields the mitigated conditional
//! state. Joint operators store the control as the outermost tensor factor, so
//! every 2d-dimensional matrix here is a 2x2 grid of d-dimensional system
//! blocks.

use crate::channels::{KrausChannel, NoiseParams};
use crate::error::{Error, Result};
use crate::qmath::{kron, ComplexMatrix, Complex64, DensityMatrix};

/// Completeness tolerance for a constructed switch Kraus set.
pub const TOL_SWITCH_COMPLETENESS: f64 = 1e-10;
/// Measurement branches with probability below this are rejected as caller
/// error; for t < 1 both coherent branches stay strictly positive.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-15;

/// Control-qubit preparation sqrt(θ)|0⟩ + sqrt(1-θ)|1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    theta: f64,
}

impl ControlSpec {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) || !theta.is_finite() {
            return Err(Error::ControlTheta(theta));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// 2 sqrt(θ(1-θ)), the coherent indefiniteness weight; 1 at θ = 1/2.
    pub fn coherence(&self) -> f64 {
        2.0 * (self.theta * (1.0 - self.theta)).sqrt()
    }
}

/// Pure control state [[θ, sqrt(θ θ̄)], [sqrt(θ θ̄), θ̄]].
pub fn control_state(spec: ControlSpec) -> DensityMatrix {
    let theta = spec.theta();
    let amp = vec![
        Complex64::new(theta.sqrt(), 0.0),
        Complex64::new((1.0 - theta).sqrt(), 0.0),
    ];
    DensityMatrix::from_pure(&amp).expect("control preparation is a valid pure state")
}

/// The (|ops_A| * |ops_B|) joint operators of the switch superchannel.
#[derive(Debug, Clone)]
pub struct SwitchKrausSet {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl SwitchKrausSet {
    pub fn system_dim(&self) -> usize {
        self.dim
    }

    pub fn joint_dim(&self) -> usize {
        2 * self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn completeness_defect(&self) -> f64 {
        let joint = self.joint_dim();
        let mut acc = ComplexMatrix::zeros(joint, joint);
        for w in &self.ops {
            acc = &acc + &(&w.dagger() * w);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(joint))
    }
}

/// Joint operators W_ij = B_j A_i ⊗ |0⟩⟨0| + A_i B_j ⊗ |1⟩⟨1|: with the
/// control in |0⟩ channel A acts first, with |1⟩ channel B acts first.
pub fn switch_kraus(ch_a: &KrausChannel, ch_b: &KrausChannel) -> Result<SwitchKrausSet> {
    if ch_a.dim() != ch_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch_a.dim(),
            actual: ch_b.dim(),
        });
    }
    let d = ch_a.dim();
    let p0 = projector(0);
    let p1 = projector(1);
    let mut ops = Vec::with_capacity(ch_a.ops().len() * ch_b.ops().len());
    for a in ch_a.ops() {
        for b in ch_b.ops() {
            let first_a = b * a;
            let first_b = a * b;
            ops.push(&kron(&p0, &first_a) + &kron(&p1, &first_b));
        }
    }
    let set = SwitchKrausSet { dim: d, ops };
    let defect = set.completeness_defect();
    if defect > TOL_SWITCH_COMPLETENESS {
        return Err(Error::KrausCompleteness(defect));
    }
    Ok(set)
}

fn projector(basis: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(2, 2);
    p.set(basis, basis, Complex64::ONE);
    p
}

/// System-plus-control state on dimension 2d.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    system_dim: usize,
    state: DensityMatrix,
}

impl JointState {
    pub fn new(system_dim: usize, state: DensityMatrix) -> Result<Self> {
        if state.dim() != 2 * system_dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * system_dim,
                actual: state.dim(),
            });
        }
        Ok(Self { system_dim, state })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.state
    }

    /// System block ⟨a| . |b⟩ over the control indices a, b ∈ {0, 1}.
    pub fn control_block(&self, a: usize, b: usize) -> ComplexMatrix {
        let d = self.system_dim;
        ComplexMatrix::from_fn(d, d, |r, c| self.state.mat().get(a * d + r, b * d + c))
    }
}

/// Full Kraus-sum evolution sum_ij W_ij (ρ ⊗ ρ_c) W_ij†. This is the
/// brute-force path; nothing here knows any closed form.
pub fn apply_switch(
    rho: &DensityMatrix,
    spec: ControlSpec,
    kset: &SwitchKrausSet,
) -> Result<JointState> {
    if rho.dim() != kset.system_dim() {
        return Err(Error::DimensionMismatch {
            expected: kset.system_dim(),
            actual: rho.dim(),
        });
    }
    let joint0 = kron(control_state(spec).mat(), rho.mat());
    let mut acc = ComplexMatrix::zeros(kset.joint_dim(), kset.joint_dim());
    for w in kset.ops() {
        acc = &acc + &joint0.conjugate_with(w);
    }
    JointState::new(rho.dim(), DensityMatrix::new(acc)?)
}

/// Closed-form output of the switch of two D_sqrt(t) copies:
///
///   (1-sqrt(t))² [ Tr(ρ) I/d ⊗ (θ|0⟩⟨0| + θ̄|1⟩⟨1|) + ρ/d² ⊗ sqrt(θθ̄)(|0⟩⟨1| + |1⟩⟨0|) ]
///   + 2 sqrt(t)(1-sqrt(t)) Tr(ρ) I/d ⊗ ρ_c + t ρ ⊗ ρ_c.
///
/// Must agree with `apply_switch` on the same channels.
pub fn apply_switch_closed_form(
    rho: &DensityMatrix,
    spec: ControlSpec,
    t: NoiseParams,
) -> Result<JointState> {
    let d = rho.dim();
    let s = t.t().sqrt();
    let theta = spec.theta();
    let theta_bar = 1.0 - theta;
    let cross = (theta * theta_bar).sqrt();
    let tr = rho.mat().trace();
    let mixed = ComplexMatrix::identity(d).scale(tr * Complex64::new(1.0 / d as f64, 0.0));

    let diag_ctrl = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => Complex64::new(theta, 0.0),
        (1, 1) => Complex64::new(theta_bar, 0.0),
        _ => Complex64::ZERO,
    });
    let offdiag_ctrl = ComplexMatrix::from_fn(2, 2, |r, c| {
        if r != c {
            Complex64::new(cross, 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let rho_c = control_state(spec);

    let w_def = (1.0 - s) * (1.0 - s);
    let term_definite = &kron(&diag_ctrl, &mixed).scale_re(w_def)
        + &kron(&offdiag_ctrl, &rho.mat().scale_re(1.0 / (d * d) as f64)).scale_re(w_def);
    let term_mixed = kron(rho_c.mat(), &mixed).scale_re(2.0 * s * (1.0 - s));
    let term_clean = kron(rho_c.mat(), rho.mat()).scale_re(t.t());

    let out = &(&term_definite + &term_mixed) + &term_clean;
    JointState::new(d, DensityMatrix::new(out)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureBranch {
    Plus,
    Minus,
}

/// Projects the control onto |±⟩ and renormalizes.
///
/// Returns the conditional system state and the branch probability; the two
/// branch probabilities sum to one. The |+⟩ branch is the canonical mitigated
/// output, |-⟩ is kept for diagnostics.
pub fn measure_control(
    joint: &JointState,
    branch: MeasureBranch,
) -> Result<(DensityMatrix, f64)> {
    let sign = match branch {
        MeasureBranch::Plus => 1.0,
        MeasureBranch::Minus => -1.0,
    };
    let b00 = joint.control_block(0, 0);
    let b01 = joint.control_block(0, 1);
    let b10 = joint.control_block(1, 0);
    let b11 = joint.control_block(1, 1);
    let unnorm = (&(&b00 + &b11) + &(&b01 + &b10).scale_re(sign)).scale_re(0.5);
    let prob = unnorm.trace().re;
    if prob < MIN_BRANCH_PROBABILITY {
        return Err(Error::DegenerateBranch(prob));
    }
    let state = DensityMatrix::new(unnorm.scale_re(1.0 / prob))?;
    Ok((state, prob))
}
