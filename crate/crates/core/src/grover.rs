//! Grover operator construction plus ideal and noisy success probabilities.
//!
//! The oracle is the phase form I - 2|x⟩⟨x| on the search register, the
//! diffusion is 2|ψ⟩⟨ψ| - I about the uniform state, and G is their product.
//! Noise is the total depolarizing channel applied once per iteration; since
//! it commutes with every unitary, k noisy iterations leave the state in the
//! two-dimensional affine family t^k ρ(k) + (1 - t^k) I/d.

use crate::channels::{depolarize, NoiseParams};
use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, Complex64, DensityMatrix};

/// Search-space description: d = 2^n basis states with one marked index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroverConfig {
    n: usize,
    d: usize,
    marked: usize,
}

impl GroverConfig {
    pub fn new(n: usize, marked: usize) -> Result<Self> {
        if !(1..=6).contains(&n) {
            return Err(Error::QubitCount(n, 1, 6));
        }
        let d = 1usize << n;
        if marked >= d {
            return Err(Error::MarkedIndex { marked, dim: d });
        }
        Ok(Self { n, d, marked })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn marked(&self) -> usize {
        self.marked
    }
}

/// Rotation angle arcsin(1/sqrt(d)) of one Grover iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverAngle {
    theta_g: f64,
}

impl GroverAngle {
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::SearchDimension(d));
        }
        Ok(Self {
            theta_g: (1.0 / (d as f64).sqrt()).asin(),
        })
    }

    pub fn radians(&self) -> f64 {
        self.theta_g
    }
}

/// Uniform superposition |ψ⟩⟨ψ| with every entry 1/d.
pub fn uniform_state(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::SearchDimension(d));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    DensityMatrix::from_pure(&vec![amp; d])
}

/// Phase oracle I - 2|x⟩⟨x|.
pub fn phase_oracle(cfg: &GroverConfig) -> ComplexMatrix {
    let mut o = ComplexMatrix::identity(cfg.d());
    o.set(cfg.marked(), cfg.marked(), Complex64::new(-1.0, 0.0));
    o
}

/// Diffusion 2|ψ⟩⟨ψ| - I about the uniform state.
pub fn diffusion(d: usize) -> ComplexMatrix {
    let inv = 2.0 / d as f64;
    ComplexMatrix::from_fn(d, d, |r, c| {
        let base = Complex64::new(inv, 0.0);
        if r == c {
            base - Complex64::ONE
        } else {
            base
        }
    })
}

/// The Grover operator G = (2|ψ⟩⟨ψ| - I)(I - 2|x⟩⟨x|).
pub fn grover_unitary(cfg: &GroverConfig) -> ComplexMatrix {
    &diffusion(cfg.d()) * &phase_oracle(cfg)
}

/// Noiseless state after k iterations, G^k ρ(0) G†^k.
pub fn ideal_state(k: usize, cfg: &GroverConfig) -> DensityMatrix {
    let g = grover_unitary(cfg);
    let mut rho = uniform_state(cfg.d()).expect("d >= 2 by construction");
    for _ in 0..k {
        rho = rho.conjugated(&g).expect("unitary conjugation preserves validity");
    }
    rho
}

/// sin²((2k+1) arcsin(1/sqrt(d))).
pub fn ideal_success_probability(k: usize, d: usize) -> f64 {
    let theta = GroverAngle::for_dimension(d)
        .expect("dimension checked by callers")
        .radians();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// floor((π/4) sqrt(d)), the standard stopping point.
pub fn optimal_iterations(d: usize) -> usize {
    (std::f64::consts::FRAC_PI_4 * (d as f64).sqrt()).floor() as usize
}

/// Closed-form state after k noisy iterations: t^k ρ(k) + (1 - t^k) I/d.
pub fn noisy_state(k: usize, t: NoiseParams, cfg: &GroverConfig) -> DensityMatrix {
    let weight = t.t().powi(k as i32);
    let ideal = ideal_state(k, cfg);
    let d = cfg.d();
    let mixed = ComplexMatrix::identity(d).scale_re((1.0 - weight) / d as f64);
    let out = &ideal.mat().scale_re(weight) + &mixed;
    DensityMatrix::new(out).expect("convex mixture of states is a state")
}

/// Closed-form success probability (1 - t^k)/d + t^k sin²((2k+1) arcsin(1/sqrt(d))).
pub fn noisy_success_probability(k: usize, t: NoiseParams, d: usize) -> f64 {
    let weight = t.t().powi(k as i32);
    (1.0 - weight) / d as f64 + weight * ideal_success_probability(k, d)
}

/// Lower bound t^k sin²((2k+1) arcsin(1/sqrt(d))) kept from the noise-free
/// history term.
pub fn noisy_success_lower_bound(k: usize, t: NoiseParams, d: usize) -> f64 {
    t.t().powi(k as i32) * ideal_success_probability(k, d)
}

/// Success probability of (D_t ∘ G_x)^k by density-matrix evolution, averaged
/// over all d marked indices. Per-index values must agree to 1e-12 (the
/// problem is symmetric under relabeling), so the average equals any single
/// entry; the agreement is checked rather than assumed.
pub fn noisy_success_probability_sim(k: usize, t: NoiseParams, cfg: &GroverConfig) -> Result<f64> {
    let d = cfg.d();
    let mut total = 0.0;
    let mut values = Vec::with_capacity(d);
    for x in 0..d {
        let cfg_x = GroverConfig::new(cfg.n(), x)?;
        let g = grover_unitary(&cfg_x);
        let mut rho = uniform_state(d)?;
        for _ in 0..k {
            rho = depolarize(&rho.conjugated(&g)?, t);
        }
        let p = rho.probability_at(x);
        values.push(p);
        total += p;
    }
    let mean = total / d as f64;
    for &p in &values {
        let dev = (p - mean).abs();
        if dev > 1e-12 {
            return Err(Error::CrossCheck {
                context: "oracle-index symmetry of noisy success probability",
                deviation: dev,
            });
        }
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_kraus, depolarizing_kraus};
    use crate::qmath::hermitian_eigenvalues;

    // Independent state-vector evolution used as the oracle for the
    // density-matrix paths below.
    fn state_vector_success(k: usize, cfg: &GroverConfig) -> f64 {
        let d = cfg.d();
        let mut psi = vec![1.0 / (d as f64).sqrt(); d];
        for _ in 0..k {
            psi[cfg.marked()] = -psi[cfg.marked()];
            let mean = psi.iter().sum::<f64>() / d as f64;
            for a in psi.iter_mut() {
                *a = 2.0 * mean - *a;
            }
        }
        psi[cfg.marked()].powi(2)
    }

    #[test]
    fn uniform_state_entries_and_purity() {
        for d in [2usize, 4] {
            let rho = uniform_state(d).unwrap();
            for r in 0..d {
                for c in 0..d {
                    assert!((rho.mat().get(r, c).re - 1.0 / d as f64).abs() < 1e-15);
                    assert!(rho.mat().get(r, c).im.abs() < 1e-15);
                }
            }
        }
        let rho = uniform_state(16).unwrap();
        assert!((rho.mat().trace().re - 1.0).abs() < 1e-12);
        let eigs = hermitian_eigenvalues(rho.mat()).unwrap();
        assert!((eigs.last().unwrap() - 1.0).abs() < 1e-12, "uniform state is rank one");
        assert!(uniform_state(1).is_err());
    }

    #[test]
    fn grover_hits_target_exactly_at_d4() {
        let cfg = GroverConfig::new(2, 0).unwrap();
        let rho = ideal_state(1, &cfg);
        assert!((rho.probability_at(0) - 1.0).abs() < 1e-12);
        assert!((ideal_success_probability(1, 4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grover_operator_is_unitary() {
        let cfg = GroverConfig::new(4, 11).unwrap();
        let g = grover_unitary(&cfg);
        let gtg = &g.dagger() * &g;
        assert!(gtg.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-12);
    }

    #[test]
    fn repeated_applications_match_state_vector_oracle() {
        let cfg = GroverConfig::new(4, 5).unwrap();
        let sv = state_vector_success(3, &cfg);
        let rho = ideal_state(3, &cfg);
        assert!((rho.probability_at(5) - sv).abs() < 1e-12);
        assert!((sv - 0.9613).abs() < 5e-5, "k=3, d=16 lands near 0.9613, got {sv}");
    }

    #[test]
    fn closed_form_success_probability() {
        assert!((ideal_success_probability(0, 4) - 0.25).abs() < 1e-15);
        assert!((ideal_success_probability(0, 16) - 1.0 / 16.0).abs() < 1e-15);
        let cfg = GroverConfig::new(4, 0).unwrap();
        let sim = ideal_state(3, &cfg).probability_at(0);
        assert!((ideal_success_probability(3, 16) - sim).abs() < 1e-12);
    }

    #[test]
    fn optimal_iteration_counts() {
        assert_eq!(optimal_iterations(16), 3);
        assert_eq!(optimal_iterations(4), 1);
        assert_eq!(optimal_iterations(64), 6);
    }

    #[test]
    fn noisy_state_endpoints() {
        let cfg = GroverConfig::new(2, 1).unwrap();
        let pure = noisy_state(2, NoiseParams::new(1.0).unwrap(), &cfg);
        assert!(pure.mat().max_abs_diff(ideal_state(2, &cfg).mat()) < 1e-12);

        let start = noisy_state(0, NoiseParams::new(0.3).unwrap(), &cfg);
        assert!(start.mat().max_abs_diff(uniform_state(4).unwrap().mat()) < 1e-12);
    }

    #[test]
    fn noisy_state_matches_channel_simulation() {
        let cfg = GroverConfig::new(2, 2).unwrap();
        let t = NoiseParams::new(0.5).unwrap();
        let g = grover_unitary(&cfg);
        let ch = depolarizing_kraus(t, false, 4).unwrap();
        let mut rho = uniform_state(4).unwrap();
        for _ in 0..2 {
            rho = apply_kraus(&ch, &rho.conjugated(&g).unwrap()).unwrap();
        }
        let closed = noisy_state(2, t, &cfg);
        assert!(closed.mat().max_abs_diff(rho.mat()) < 1e-12);
    }

    #[test]
    fn noisy_probability_endpoints_and_value() {
        for k in 1..=3 {
            assert!((noisy_success_probability(k, NoiseParams::new(0.0).unwrap(), 16) - 1.0 / 16.0).abs() < 1e-15);
            assert!(
                (noisy_success_probability(k, NoiseParams::new(1.0).unwrap(), 16)
                    - ideal_success_probability(k, 16))
                .abs()
                    < 1e-15
            );
        }
        let p = noisy_success_probability(2, NoiseParams::new(0.5).unwrap(), 16);
        assert!((p - 0.2740).abs() < 5e-5, "got {p}");
    }

    #[test]
    fn simulation_agrees_with_closed_form() {
        let cases = [(1usize, 0.25, 2usize), (3, 0.75, 4)];
        for (k, t, n) in cases {
            let cfg = GroverConfig::new(n, 0).unwrap();
            let noise = NoiseParams::new(t).unwrap();
            let sim = noisy_success_probability_sim(k, noise, &cfg).unwrap();
            let closed = noisy_success_probability(k, noise, cfg.d());
            assert!((sim - closed).abs() < 1e-12, "mismatch at k={k}, t={t}, d={}", cfg.d());
        }
    }

    #[test]
    fn closed_form_equals_simulation_on_grid() {
        for n in [2usize, 4] {
            let cfg = GroverConfig::new(n, 1).unwrap();
            for k in 0..=4 {
                for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let noise = NoiseParams::new(t).unwrap();
                    let sim = noisy_success_probability_sim(k, noise, &cfg).unwrap();
                    let closed = noisy_success_probability(k, noise, cfg.d());
                    assert!((sim - closed).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn lower_bound_holds_on_grid() {
        for k in 0..=4 {
            for i in 0..=20 {
                let t = NoiseParams::new(i as f64 / 20.0).unwrap();
                let p = noisy_success_probability(k, t, 16);
                assert!(p + 1e-15 >= noisy_success_lower_bound(k, t, 16));
            }
        }
    }

    #[test]
    fn grover_channel_is_unital() {
        let cfg = GroverConfig::new(4, 3).unwrap();
        let g = grover_unitary(&cfg);
        let mm = DensityMatrix::maximally_mixed(16);
        let out = mm.conjugated(&g).unwrap();
        assert!(out.mat().max_abs_diff(mm.mat()) < 1e-12);
    }

    #[test]
    fn diffusion_sign_is_a_global_phase() {
        // 2|ψ⟩⟨ψ| - I and I - 2|ψ⟩⟨ψ| give identical density matrices.
        let cfg = GroverConfig::new(3, 6).unwrap();
        let d = cfg.d();
        let flipped = &diffusion(d).scale_re(-1.0) * &phase_oracle(&cfg);
        let rho0 = uniform_state(d).unwrap();
        let a = rho0.conjugated(&grover_unitary(&cfg)).unwrap();
        let b = rho0.conjugated(&flipped).unwrap();
        assert!(a.mat().max_abs_diff(b.mat()) < 1e-12);
    }

    #[test]
    fn success_is_symmetric_in_marked_index() {
        let t = NoiseParams::new(0.6).unwrap();
        let mut values = Vec::new();
        for x in 0..8 {
            let cfg = GroverConfig::new(3, x).unwrap();
            let g = grover_unitary(&cfg);
            let mut rho = uniform_state(8).unwrap();
            for _ in 0..2 {
                rho = depolarize(&rho.conjugated(&g).unwrap(), t);
            }
            values.push(rho.probability_at(x));
        }
        for v in &values {
            assert!((v - values[0]).abs() < 1e-12);
        }
    }
}
