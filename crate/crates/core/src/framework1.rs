//! Stepwise switched evolution: Grover iteration, switch of two D_sqrt(t)
//! factors, |±⟩ measurement and post-selection on |+⟩ after every iteration.
//!
//! At θ = 1/2 every post-selected step acts as ρ -> f_ξ(t) GρG† + (1-f_ξ) I/d,
//! so k iterations give the closed form P_ξ(k) = f_ξ^k P(k,0,d) + (1-f_ξ^k)/d.
//! f_ξ(t) > t for t in (0,1): the switch retains strictly more of the rotated
//! state per step than the bare depolarizing channel does.

use crate::channels::NoiseParams;
use crate::error::Result;
use crate::grover::{grover_unitary, ideal_success_probability, uniform_state, GroverConfig};
use crate::qmath::DensityMatrix;
use crate::qswitch::{
    apply_switch_closed_form, measure_control, ControlSpec, MeasureBranch,
};

/// Outcome of one switched, post-selected iteration.
#[derive(Debug, Clone)]
pub struct F1StepResult {
    /// Normalized conditional state after the |+⟩ projection.
    pub state: DensityMatrix,
    /// Probability of the |+⟩ outcome this step.
    pub branch_prob: f64,
    /// Mixing coefficient applied this step (weight kept on the rotated state).
    pub f_value: f64,
}

/// Post-selected mixing coefficient at θ = 1/2:
///
///   f_ξ(t) = [((1-sqrt(t))/d)² + 2t] / [(1 + (t - 2 sqrt(t))(1 - d²))/d² + 1].
pub fn f_xi(t: NoiseParams, d: usize) -> f64 {
    let tt = t.t();
    let s = tt.sqrt();
    let df = d as f64;
    let num = ((1.0 - s) / df).powi(2) + 2.0 * tt;
    let den = (1.0 + (tt - 2.0 * s) * (1.0 - df * df)) / (df * df) + 1.0;
    num / den
}

/// Per-step coefficients of the measured branch at arbitrary θ. With
/// c = 2 sqrt(θ θ̄), the |+⟩ branch keeps weight a = t + c r_ρ on the rotated
/// state and b = (1-t) + c r_I on the mixed part; a/(a+b) is the applied
/// mixing coefficient and (a+b)/2 the branch probability.
fn branch_coefficients(t: NoiseParams, d: usize, spec: ControlSpec) -> (f64, f64) {
    let tt = t.t();
    let s = tt.sqrt();
    let df = d as f64;
    let c = spec.coherence();
    let r_rho = ((1.0 - s) / df).powi(2) + tt;
    let r_id = 2.0 * s * (1.0 - s);
    let a = tt + c * r_rho;
    let b = (1.0 - tt) + c * r_id;
    (a, b)
}

/// One iteration: apply G, switch the two noise factors, measure |±⟩ and keep
/// the |+⟩ branch.
pub fn step(
    rho_in: &DensityMatrix,
    t: NoiseParams,
    spec: ControlSpec,
    cfg: &GroverConfig,
) -> Result<F1StepResult> {
    let g = grover_unitary(cfg);
    let rotated = rho_in.conjugated(&g)?;
    let joint = apply_switch_closed_form(&rotated, spec, t)?;
    let (state, branch_prob) = measure_control(&joint, MeasureBranch::Plus)?;
    let (a, b) = branch_coefficients(t, cfg.d(), spec);
    Ok(F1StepResult {
        state,
        branch_prob,
        f_value: a / (a + b),
    })
}

/// Closed-form success probability f_ξ^k P(k,0,d) + (1 - f_ξ^k)/d.
pub fn p_framework1(k: usize, t: NoiseParams, d: usize) -> f64 {
    let f = f_xi(t, d).powi(k as i32);
    f * ideal_success_probability(k, d) + (1.0 - f) / d as f64
}

/// Success probability by iterating `step` k times from the uniform state.
/// Equals the closed form at θ = 1/2; other θ values return the simulated
/// value for the correspondingly weaker switch.
pub fn p_framework1_sim(
    k: usize,
    t: NoiseParams,
    spec: ControlSpec,
    cfg: &GroverConfig,
) -> Result<f64> {
    let mut rho = uniform_state(cfg.d())?;
    for _ in 0..k {
        rho = step(&rho, t, spec, cfg)?.state;
    }
    Ok(rho.probability_at(cfg.marked()))
}
