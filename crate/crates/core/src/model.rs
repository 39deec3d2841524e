//! Closed-form quantities of the semi-quantum RBM.
//!
//! The Hamiltonian couples classical visible spins to hidden qubits that
//! carry both a longitudinal bias and a transverse field. Because every term
//! commutes with the visible spins, conditioning on a visible configuration
//! leaves each hidden unit in an independent 2x2 Gibbs state, and every
//! marginal, expectation value, and relative-entropy term below has an exact
//! expression in terms of the per-unit effective field
//! `b_eff = b_h[j] + Σ_i w[i][j] v_i` and gap `D = sqrt(gamma[j]^2 + b_eff^2)`.
//!
//! Visible-weight convention: the unnormalized log-weight of configuration v
//! is `Σ_i b_v[i] v_i + Σ_j log cosh D_j(v)` (positive sign on the visible
//! bias term), which is what tracing the hidden units out of e^{-H} yields.
//! The dense oracle cross-checks pin this sign.

use crate::dist::{kl_divergence, VisibleDistribution};
use crate::error::{Error, Result};
use crate::numeric::{log_cosh, log_sum_exp, tanh_over};
use crate::params::{GradientVector, Params};
use crate::spin::{spin_at, SpinConfig};

/// Clamped single-unit state: effective field, gap, and the two Pauli
/// expectations (Bloch components) of the hidden unit conditioned on a
/// visible configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenLocalState {
    pub b_eff: f64,
    pub d: f64,
    pub mz: f64,
    pub mx: f64,
}

fn check_hidden_index(p: &Params, j: usize) -> Result<()> {
    if j >= p.n_hidden {
        return Err(Error::IndexOutOfRange {
            what: "hidden unit",
            index: j,
            size: p.n_hidden,
        });
    }
    Ok(())
}

#[inline]
fn effective_field_at(p: &Params, index: usize, j: usize) -> f64 {
    let mut acc = p.b_h[j];
    for i in 0..p.n_visible {
        acc += p.w[i * p.n_hidden + j] * spin_at(index, i);
    }
    acc
}

#[inline]
fn local_state_at(p: &Params, index: usize, j: usize) -> HiddenLocalState {
    let b_eff = effective_field_at(p, index, j);
    let d = f64::hypot(p.gamma[j], b_eff);
    let t = tanh_over(d);
    HiddenLocalState {
        b_eff,
        d,
        mz: b_eff * t,
        mx: p.gamma[j] * t,
    }
}

/// `b_h[j] + Σ_i w[i][j] v_i`, the field seen by hidden unit j when the
/// visible layer is clamped to v.
pub fn effective_field(p: &Params, v: &SpinConfig, j: usize) -> Result<f64> {
    check_shapes(p, v)?;
    check_hidden_index(p, j)?;
    Ok(effective_field_at(p, v.index(), j))
}

/// `sqrt(gamma[j]^2 + b_eff^2)`, the spectral gap of the clamped unit.
pub fn hidden_gap(p: &Params, v: &SpinConfig, j: usize) -> Result<f64> {
    check_shapes(p, v)?;
    check_hidden_index(p, j)?;
    Ok(f64::hypot(p.gamma[j], effective_field_at(p, v.index(), j)))
}

/// Bloch data of hidden unit j clamped to v: `mz = (b_eff/D) tanh D`,
/// `mx = (gamma/D) tanh D`, with the D -> 0 limit handled exactly.
pub fn clamped_hidden_state(p: &Params, v: &SpinConfig, j: usize) -> Result<HiddenLocalState> {
    check_shapes(p, v)?;
    check_hidden_index(p, j)?;
    Ok(local_state_at(p, v.index(), j))
}

fn check_shapes(p: &Params, v: &SpinConfig) -> Result<()> {
    if v.n() != p.n_visible {
        return Err(Error::ShapeMismatch {
            context: format!(
                "configuration over {} spins against {} visible units",
                v.n(),
                p.n_visible
            ),
        });
    }
    Ok(())
}

#[inline]
fn log_weight_at(p: &Params, index: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..p.n_visible {
        acc += p.b_v[i] * spin_at(index, i);
    }
    for j in 0..p.n_hidden {
        let b_eff = effective_field_at(p, index, j);
        acc += log_cosh(f64::hypot(p.gamma[j], b_eff));
    }
    acc
}

/// Unnormalized log-weight of a visible configuration:
/// `Σ_i b_v[i] v_i + Σ_j log cosh D_j(v)`.
pub fn log_visible_weight(p: &Params, v: &SpinConfig) -> f64 {
    assert_eq!(v.n(), p.n_visible, "configuration/parameter shape mismatch");
    log_weight_at(p, v.index())
}

/// Exact marginal over visible configurations, normalized through
/// log-sum-exp so arbitrary parameter magnitudes stay in range.
pub fn visible_marginal(p: &Params) -> VisibleDistribution {
    let len = 1usize << p.n_visible;
    let mut log_w = vec![0.0; len];
    for (index, lw) in log_w.iter_mut().enumerate() {
        *lw = log_weight_at(p, index);
    }
    let log_z = log_sum_exp(&log_w);
    let probs = log_w.iter().map(|lw| (lw - log_z).exp()).collect();
    VisibleDistribution::from_normalized(p.n_visible, probs)
}

/// Shared accumulation for both phases: expectation values of σ_i^z, σ_j^z,
/// σ_j^x, and σ_i^z σ_j^z under per-unit clamped states, weighted by a
/// probability table over visible configurations.
fn phase_stats(p: &Params, weights: &[f64]) -> GradientVector {
    let n = p.n_visible;
    let m = p.n_hidden;
    let mut g = GradientVector::zeros(n, m);
    for (index, &pv) in weights.iter().enumerate() {
        if pv == 0.0 {
            continue;
        }
        for i in 0..n {
            g.b_v[i] += pv * spin_at(index, i);
        }
        for j in 0..m {
            let s = local_state_at(p, index, j);
            g.b_h[j] += pv * s.mz;
            g.gamma[j] += pv * s.mx;
            for i in 0..n {
                g.w[i * m + j] += pv * spin_at(index, i) * s.mz;
            }
        }
    }
    g
}

/// Data-averaged clamped expectations (the positive phase).
pub fn positive_phase(p: &Params, data: &VisibleDistribution) -> Result<GradientVector> {
    if data.n_visible() != p.n_visible {
        return Err(Error::ShapeMismatch {
            context: format!(
                "data over {} visible units against model with {}",
                data.n_visible(),
                p.n_visible
            ),
        });
    }
    Ok(phase_stats(p, data.probs()))
}

/// Model-averaged expectations (the negative phase); equals the analytic
/// gradient of log Z with respect to each parameter.
pub fn negative_phase(p: &Params) -> GradientVector {
    let marginal = visible_marginal(p);
    phase_stats(p, marginal.probs())
}

/// Negative phase reusing an already-computed marginal of `p`.
pub(crate) fn negative_phase_with_marginal(
    p: &Params,
    marginal: &VisibleDistribution,
) -> GradientVector {
    debug_assert_eq!(marginal.n_visible(), p.n_visible);
    phase_stats(p, marginal.probs())
}

/// Per-unit relative entropy between the clamped states of `p_t` and `p`,
/// computed from eigenvalues and the Bloch inner product:
///
/// D(rho_t || rho) = log cosh D - log cosh D_t
///                 + (mx_t gamma_t + mz_t b_eff_t) - (mx_t gamma + mz_t b_eff)
fn unit_relative_entropy(
    t: &HiddenLocalState,
    gamma_t: f64,
    s: &HiddenLocalState,
    gamma_s: f64,
) -> f64 {
    log_cosh(s.d) - log_cosh(t.d) + (t.mx * gamma_t + t.mz * t.b_eff)
        - (t.mx * gamma_s + t.mz * s.b_eff)
}

/// Σ_v P(v) Σ_j D(rho_{j|v, p_t} || rho_{j|v, p}), the hidden-conditional
/// part of the joint objective. The product structure over hidden units
/// makes the per-configuration term a plain sum of 2x2 relative entropies.
pub fn conditional_relative_entropy_term(
    p_t: &Params,
    p: &Params,
    data: &VisibleDistribution,
) -> Result<f64> {
    if p_t.n_visible != p.n_visible || p_t.n_hidden != p.n_hidden {
        return Err(Error::ShapeMismatch {
            context: format!(
                "parameter shapes ({}, {}) vs ({}, {})",
                p_t.n_visible, p_t.n_hidden, p.n_visible, p.n_hidden
            ),
        });
    }
    if data.n_visible() != p.n_visible {
        return Err(Error::ShapeMismatch {
            context: "data shape disagrees with parameters".into(),
        });
    }
    let mut acc = 0.0;
    for (index, &pv) in data.probs().iter().enumerate() {
        if pv == 0.0 {
            continue;
        }
        let mut per_v = 0.0;
        for j in 0..p.n_hidden {
            let t = local_state_at(p_t, index, j);
            let s = local_state_at(p, index, j);
            per_v += unit_relative_entropy(&t, p_t.gamma[j], &s, p.gamma[j]);
        }
        acc += pv * per_v;
    }
    Ok(acc)
}

/// The alternating-projection objective
/// `Σ_v P(v) D(rho_{H|v,p_t} || rho_{H|v,p}) + KL(data || marginal(p))`.
pub fn joint_objective(p_t: &Params, p: &Params, data: &VisibleDistribution) -> Result<f64> {
    let conditional = conditional_relative_entropy_term(p_t, p, data)?;
    let marginal = visible_marginal(p);
    Ok(conditional + kl_divergence(data, &marginal)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256StarStar;
    use proptest::prelude::*;

    fn random_params(n: usize, m: usize, scale: f64, rng: &mut Xoshiro256StarStar) -> Params {
        Params::new(
            (0..n).map(|_| rng.uniform_symmetric(scale)).collect(),
            (0..m).map(|_| rng.uniform_symmetric(scale)).collect(),
            (0..m).map(|_| rng.uniform_symmetric(scale)).collect(),
            (0..n)
                .map(|_| (0..m).map(|_| rng.uniform_symmetric(scale)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn random_dist(n: usize, rng: &mut Xoshiro256StarStar) -> VisibleDistribution {
        let weights: Vec<f64> = (0..1usize << n).map(|_| rng.next_f64() + 1e-3).collect();
        VisibleDistribution::from_weights(n, weights).unwrap()
    }

    #[test]
    fn effective_field_direct_arithmetic() {
        let p = Params::new(
            vec![0.0, 0.0],
            vec![0.5],
            vec![0.0],
            vec![vec![0.25], vec![-1.0]],
        )
        .unwrap();
        let v = SpinConfig::from_spins(&[1, -1]).unwrap();
        assert_eq!(effective_field(&p, &v, 0).unwrap(), 0.5 + 0.25 + 1.0);
    }

    #[test]
    fn effective_field_decoupled_limit() {
        let p = Params::new(vec![0.0; 3], vec![0.7], vec![0.0], vec![vec![0.0]; 3]).unwrap();
        for index in 0..8 {
            let v = SpinConfig::from_index(index, 3).unwrap();
            assert_eq!(effective_field(&p, &v, 0).unwrap(), 0.7);
        }
    }

    #[test]
    fn effective_field_odd_in_v_without_bias() {
        let p = Params::new(
            vec![0.0; 2],
            vec![0.0],
            vec![0.0],
            vec![vec![0.3], vec![-0.9]],
        )
        .unwrap();
        for index in 0..4usize {
            let v = SpinConfig::from_index(index, 2).unwrap();
            let neg = SpinConfig::from_index(!index & 3, 2).unwrap();
            assert_eq!(
                effective_field(&p, &v, 0).unwrap(),
                -effective_field(&p, &neg, 0).unwrap()
            );
        }
    }

    #[test]
    fn effective_field_index_check() {
        let p = Params::zeros(2, 1).unwrap();
        let v = SpinConfig::from_index(0, 2).unwrap();
        assert!(effective_field(&p, &v, 1).is_err());
    }

    #[test]
    fn hidden_gap_cases() {
        let p = Params::new(vec![0.0], vec![4.0], vec![3.0], vec![vec![0.0]]).unwrap();
        let v = SpinConfig::from_index(0, 1).unwrap();
        assert!((hidden_gap(&p, &v, 0).unwrap() - 5.0).abs() < 1e-15);

        let classical = Params::new(vec![0.0], vec![-2.5], vec![0.0], vec![vec![0.0]]).unwrap();
        assert!((hidden_gap(&classical, &v, 0).unwrap() - 2.5).abs() < 1e-15);

        let transverse = Params::new(vec![0.0], vec![0.0], vec![-1.5], vec![vec![0.0]]).unwrap();
        assert!((hidden_gap(&transverse, &v, 0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn clamped_state_saturated_classical() {
        let p = Params::new(vec![0.0], vec![50.0], vec![0.0], vec![vec![0.0]]).unwrap();
        let v = SpinConfig::from_index(0, 1).unwrap();
        let s = clamped_hidden_state(&p, &v, 0).unwrap();
        assert!((s.mz - 1.0).abs() < 1e-12);
        assert_eq!(s.mx, 0.0);
    }

    #[test]
    fn clamped_state_pure_transverse() {
        let p = Params::new(vec![0.0], vec![0.0], vec![2.0], vec![vec![0.0]]).unwrap();
        let v = SpinConfig::from_index(0, 1).unwrap();
        let s = clamped_hidden_state(&p, &v, 0).unwrap();
        assert_eq!(s.mz, 0.0);
        assert!((s.mx - 2.0f64.tanh()).abs() < 1e-15);
    }

    // Independent 2x2 route: exponentiate the clamped Hamiltonian by Taylor
    // series with scaling-and-squaring, then take traces.
    fn expm2(h: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let norm = h.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        let k = (norm.log2().ceil().max(0.0) as u32) + 4;
        let scale = (2.0f64).powi(-(k as i32));
        let a = [
            [h[0][0] * scale, h[0][1] * scale],
            [h[1][0] * scale, h[1][1] * scale],
        ];
        let mut result = [[1.0, 0.0], [0.0, 1.0]];
        let mut term = [[1.0, 0.0], [0.0, 1.0]];
        for n in 1..30 {
            let t = mat_mul(term, a);
            term = [
                [t[0][0] / n as f64, t[0][1] / n as f64],
                [t[1][0] / n as f64, t[1][1] / n as f64],
            ];
            for r in 0..2 {
                for c in 0..2 {
                    result[r][c] += term[r][c];
                }
            }
        }
        for _ in 0..k {
            result = mat_mul(result, result);
        }
        result
    }

    fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }

    #[test]
    fn clamped_state_matches_dense_2x2_exponential() {
        // gamma = b_eff = 1: both Bloch components equal tanh(sqrt 2)/sqrt 2.
        let p = Params::new(vec![0.0], vec![1.0], vec![1.0], vec![vec![0.0]]).unwrap();
        let v = SpinConfig::from_index(0, 1).unwrap();
        let s = clamped_hidden_state(&p, &v, 0).unwrap();

        // exp(b_eff σ^z + gamma σ^x) built densely
        let e = expm2([[1.0, 1.0], [1.0, -1.0]]);
        let trace = e[0][0] + e[1][1];
        let mz = (e[0][0] - e[1][1]) / trace;
        let mx = (e[0][1] + e[1][0]) / trace;
        assert!((s.mz - mz).abs() < 1e-12, "{} vs {}", s.mz, mz);
        assert!((s.mx - mx).abs() < 1e-12, "{} vs {}", s.mx, mx);
        assert!((s.mz - 0.6281834549054398).abs() < 1e-12);
    }

    #[test]
    fn log_weight_zero_params_is_zero() {
        let p = Params::zeros(3, 2).unwrap();
        for index in 0..8 {
            let v = SpinConfig::from_index(index, 3).unwrap();
            assert_eq!(log_visible_weight(&p, &v), 0.0);
        }
    }

    #[test]
    fn log_weight_single_visible_spin() {
        let p = Params::new(vec![1.0], vec![], vec![], vec![vec![]]).unwrap();
        let plus = SpinConfig::from_spins(&[1]).unwrap();
        let minus = SpinConfig::from_spins(&[-1]).unwrap();
        assert_eq!(log_visible_weight(&p, &plus), 1.0);
        assert_eq!(log_visible_weight(&p, &minus), -1.0);
    }

    #[test]
    fn marginal_zero_params_is_uniform() {
        let p = Params::zeros(3, 2).unwrap();
        let d = visible_marginal(&p);
        for &prob in d.probs() {
            assert!((prob - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_normalizes_even_for_large_params() {
        let p = Params::new(
            vec![100.0, -150.0],
            vec![200.0],
            vec![-120.0],
            vec![vec![80.0], vec![-90.0]],
        )
        .unwrap();
        let d = visible_marginal(&p);
        let sum: f64 = d.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(d.probs().iter().all(|&x| x.is_finite() && x >= 0.0));
    }

    // Classical RBM marginal by direct enumeration over hidden spins.
    fn classical_rbm_marginal(p: &Params) -> VisibleDistribution {
        let n = p.n_visible();
        let m = p.n_hidden();
        let mut weights = vec![0.0; 1 << n];
        for (v, weight) in weights.iter_mut().enumerate() {
            for h in 0..1usize << m {
                let mut energy = 0.0;
                for i in 0..n {
                    energy += p.b_v()[i] * spin_at(v, i);
                }
                for j in 0..m {
                    energy += p.b_h()[j] * spin_at(h, j);
                    for i in 0..n {
                        energy += p.coupling(i, j) * spin_at(v, i) * spin_at(h, j);
                    }
                }
                *weight += energy.exp();
            }
        }
        VisibleDistribution::from_weights(n, weights).unwrap()
    }

    #[test]
    fn marginal_classical_limit_matches_enumeration() {
        let mut rng = Xoshiro256StarStar::new(11);
        for _ in 0..10 {
            let mut p = random_params(3, 2, 1.5, &mut rng);
            p.zero_gamma();
            let quantum = visible_marginal(&p);
            let classical = classical_rbm_marginal(&p);
            for (a, b) in quantum.probs().iter().zip(classical.probs()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn marginal_sign_flip_symmetry() {
        let mut rng = Xoshiro256StarStar::new(5);
        let p = random_params(3, 2, 1.0, &mut rng);
        let flipped = Params::new(
            p.b_v().iter().map(|x| -x).collect(),
            p.b_h().iter().map(|x| -x).collect(),
            p.gamma().to_vec(),
            (0..3)
                .map(|i| (0..2).map(|j| p.coupling(i, j)).collect())
                .collect(),
        )
        .unwrap();
        let d = visible_marginal(&p);
        let df = visible_marginal(&flipped);
        let mask = (1usize << 3) - 1;
        for v in 0..8usize {
            assert!((d.prob(v) - df.prob(!v & mask)).abs() < 1e-14);
        }
    }

    #[test]
    fn positive_phase_saturated_point_mass() {
        let p = Params::new(
            vec![0.0, 0.0],
            vec![50.0],
            vec![0.0],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        let data = VisibleDistribution::point_mass(2, 0).unwrap();
        let g = positive_phase(&p, &data).unwrap();
        assert!((g.b_h()[0] - 1.0).abs() < 1e-12);
        assert!((g.coupling(0, 0) - 1.0).abs() < 1e-12);
        assert!((g.b_v()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positive_phase_factorizes_when_decoupled() {
        let mut rng = Xoshiro256StarStar::new(17);
        let p = Params::new(
            vec![rng.uniform_symmetric(1.0), rng.uniform_symmetric(1.0)],
            vec![rng.uniform_symmetric(1.0)],
            vec![rng.uniform_symmetric(1.0)],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        let data = random_dist(2, &mut rng);
        let g = positive_phase(&p, &data).unwrap();
        for i in 0..2 {
            let expected = g.b_v()[i] * g.b_h()[0];
            assert!((g.coupling(i, 0) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn positive_phase_shape_mismatch() {
        let p = Params::zeros(3, 1).unwrap();
        let data = VisibleDistribution::uniform(2).unwrap();
        assert!(positive_phase(&p, &data).is_err());
    }

    #[test]
    fn negative_phase_zero_params_vanishes() {
        let p = Params::zeros(3, 2).unwrap();
        let g = negative_phase(&p);
        for x in g.flatten() {
            assert!(x.abs() < 1e-15);
        }
    }

    #[test]
    fn negative_phase_frozen_spin() {
        let p = Params::new(
            vec![50.0, 0.0],
            vec![0.0],
            vec![0.0],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        let g = negative_phase(&p);
        assert!((g.b_v()[0] - 1.0).abs() < 1e-12);
        assert!(g.b_v()[1].abs() < 1e-12);
    }

    #[test]
    fn self_consistency_at_fit() {
        let mut rng = Xoshiro256StarStar::new(23);
        let p = random_params(3, 2, 1.2, &mut rng);
        let marginal = visible_marginal(&p);
        let pos = positive_phase(&p, &marginal).unwrap();
        let neg = negative_phase(&p);
        assert!(pos.max_abs_diff(&neg) < 1e-10);
    }

    #[test]
    fn negative_phase_is_log_z_gradient() {
        // central finite differences of log Z, step 1e-5
        let mut rng = Xoshiro256StarStar::new(31);
        let p = random_params(3, 2, 1.0, &mut rng);
        let g = negative_phase(&p);
        let flat = p.flatten();
        let grad = g.flatten();
        let log_z = |flat: &[f64]| -> f64 {
            let q = Params::from_flat(3, 2, flat).unwrap();
            let lws: Vec<f64> = (0..8).map(|v| log_weight_at(&q, v)).collect();
            log_sum_exp(&lws)
        };
        let step = 1e-5;
        for k in 0..flat.len() {
            let mut hi = flat.clone();
            let mut lo = flat.clone();
            hi[k] += step;
            lo[k] -= step;
            let fd = (log_z(&hi) - log_z(&lo)) / (2.0 * step);
            let err = (grad[k] - fd).abs();
            assert!(
                err <= 1e-6 * fd.abs().max(1e-2),
                "entry {k}: analytic {} vs fd {}",
                grad[k],
                fd
            );
        }
    }

    #[test]
    fn conditional_term_zero_for_identical_params() {
        let mut rng = Xoshiro256StarStar::new(41);
        let p = random_params(2, 2, 1.0, &mut rng);
        let data = random_dist(2, &mut rng);
        assert_eq!(
            conditional_relative_entropy_term(&p, &p, &data).unwrap(),
            0.0
        );
    }

    #[test]
    fn conditional_term_empty_hidden_layer() {
        let a = Params::new(vec![0.4, -0.1], vec![], vec![], vec![vec![], vec![]]).unwrap();
        let b = Params::new(vec![-0.2, 0.9], vec![], vec![], vec![vec![], vec![]]).unwrap();
        let data = VisibleDistribution::uniform(2).unwrap();
        assert_eq!(
            conditional_relative_entropy_term(&a, &b, &data).unwrap(),
            0.0
        );
    }

    // Dense 2x2 route for the relative entropy: eigendecompose both clamped
    // states explicitly and evaluate Tr rho (log rho - log sigma).
    fn dense_unit_relative_entropy(bt: f64, gt: f64, bs: f64, gs: f64) -> f64 {
        let state = |b: f64, g: f64| -> [[f64; 2]; 2] {
            let e = expm2([[b, g], [g, -b]]);
            let tr = e[0][0] + e[1][1];
            [[e[0][0] / tr, e[0][1] / tr], [e[1][0] / tr, e[1][1] / tr]]
        };
        // log of a symmetric 2x2 via closed-form eigensystem
        let logm = |m: [[f64; 2]; 2]| -> [[f64; 2]; 2] {
            let half_tr = (m[0][0] + m[1][1]) / 2.0;
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let gap = (half_tr * half_tr - det).max(0.0).sqrt();
            let (l1, l2) = (half_tr + gap, half_tr - gap);
            // eigenvector for l1
            let (c, s) = if m[0][1].abs() > 1e-300 {
                let vx = l1 - m[1][1];
                let vy = m[0][1];
                let norm = f64::hypot(vx, vy);
                (vx / norm, vy / norm)
            } else if m[0][0] >= m[1][1] {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            let (a, b) = (l1.ln(), l2.ln());
            [
                [a * c * c + b * s * s, (a - b) * c * s],
                [(a - b) * c * s, a * s * s + b * c * c],
            ]
        };
        let rho = state(bt, gt);
        let sigma = state(bs, gs);
        let lr = logm(rho);
        let ls = logm(sigma);
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                acc += rho[r][c] * (lr[c][r] - ls[c][r]);
            }
        }
        acc
    }

    #[test]
    fn conditional_term_matches_dense_2x2_logs() {
        let mut rng = Xoshiro256StarStar::new(53);
        for _ in 0..20 {
            let pt = random_params(2, 1, 1.5, &mut rng);
            let ps = random_params(2, 1, 1.5, &mut rng);
            let data = random_dist(2, &mut rng);
            let closed = conditional_relative_entropy_term(&pt, &ps, &data).unwrap();
            let mut dense = 0.0;
            for v in 0..4usize {
                let vc = SpinConfig::from_index(v, 2).unwrap();
                let bt = effective_field(&pt, &vc, 0).unwrap();
                let bs = effective_field(&ps, &vc, 0).unwrap();
                dense += data.prob(v)
                    * dense_unit_relative_entropy(bt, pt.gamma()[0], bs, ps.gamma()[0]);
            }
            assert!(
                (closed - dense).abs() < 1e-10,
                "closed {closed} vs dense {dense}"
            );
        }
    }

    #[test]
    fn joint_objective_minimum_and_reduction() {
        let mut rng = Xoshiro256StarStar::new(67);
        let p = random_params(3, 2, 1.0, &mut rng);
        let marginal = visible_marginal(&p);
        let at_min = joint_objective(&p, &p, &marginal).unwrap();
        assert!(at_min.abs() < 1e-12);

        let data = random_dist(3, &mut rng);
        let reduced = joint_objective(&p, &p, &data).unwrap();
        let kl = kl_divergence(&data, &visible_marginal(&p)).unwrap();
        assert!((reduced - kl).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bloch_norm_matches_gap(seed in 0u64..1000) {
            let mut rng = Xoshiro256StarStar::new(seed);
            let p = random_params(3, 2, 3.0, &mut rng);
            for v in 0..8usize {
                let vc = SpinConfig::from_index(v, 3).unwrap();
                for j in 0..2 {
                    let s = clamped_hidden_state(&p, &vc, j).unwrap();
                    let norm2 = s.mz * s.mz + s.mx * s.mx;
                    let expect = s.d.tanh().powi(2);
                    prop_assert!((norm2 - expect).abs() < 1e-12);
                    prop_assert!(norm2 <= 1.0 + 1e-12);
                    prop_assert!((s.d - f64::hypot(p.gamma()[j], s.b_eff)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn marginal_always_normalized(seed in 0u64..1000) {
            let mut rng = Xoshiro256StarStar::new(seed);
            let p = random_params(3, 2, 4.0, &mut rng);
            let d = visible_marginal(&p);
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(d.probs().iter().all(|&x| x > 0.0));
        }
    }
}
