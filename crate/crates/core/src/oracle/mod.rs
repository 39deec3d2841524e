//! Brute-force dense simulator of the full visible+hidden Gibbs state.
//!
//! Everything here works on explicit 2^(N+M) matrices and exists to certify
//! the closed-form model module. Joint basis states are indexed as
//! `(v << M) | h`, so hidden unit j maps to bit j and visible unit i to bit
//! M + i; all operators are real symmetric because the Hamiltonian contains
//! only sigma-z and sigma-x terms.

pub mod jacobi;

use crate::dist::VisibleDistribution;
use crate::error::{Error, Result};
use crate::model;
use crate::params::{GradientVector, Params};
use crate::spin::{spin_at, SpinConfig};
use jacobi::symmetric_eigen;

/// Largest total qubit count the dense oracle accepts.
pub const MAX_QUBITS: usize = 14;

const SYMMETRY_TOL: f64 = 1e-12;

/// A dense real symmetric operator on a power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseOperator {
    /// Zero operator of the given dimension (must be a power of two at most
    /// 2^[`MAX_QUBITS`]).
    pub fn zeros(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() || dim > (1 << MAX_QUBITS) {
            return Err(Error::DimensionLimit {
                qubits: dim.trailing_zeros() as usize,
                max: MAX_QUBITS,
            });
        }
        Ok(DenseOperator {
            dim,
            entries: vec![0.0; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut op = DenseOperator::zeros(dim)?;
        for k in 0..dim {
            op.entries[k * dim + k] = 1.0;
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.entries[r * self.dim + c] = value;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, value: f64) {
        self.entries[r * self.dim + c] += value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Largest |a[r][c] - a[c][r]|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    fn check_symmetric(&self) -> Result<()> {
        let asym = self.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { max_asym: asym });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Assemble the full Hamiltonian: −Σ_i b_v[i] σ_i^z − Σ_j (b_h[j] σ_j^z +
/// gamma[j] σ_j^x) − Σ_ij w[i][j] σ_i^z σ_j^z on N visible + M hidden qubits.
pub fn build_hamiltonian(p: &Params) -> Result<DenseOperator> {
    let n = p.n_visible();
    let m = p.n_hidden();
    if n + m > MAX_QUBITS {
        return Err(Error::DimensionLimit {
            qubits: n + m,
            max: MAX_QUBITS,
        });
    }
    let dim = 1usize << (n + m);
    let mut h = DenseOperator::zeros(dim)?;
    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..n {
            diag -= p.b_v()[i] * spin_at(s, m + i);
        }
        for j in 0..m {
            diag -= p.b_h()[j] * spin_at(s, j);
            for i in 0..n {
                diag -= p.coupling(i, j) * spin_at(s, m + i) * spin_at(s, j);
            }
        }
        h.set(s, s, diag);
        for j in 0..m {
            h.add(s, s ^ (1 << j), -p.gamma()[j]);
        }
    }
    debug_assert_eq!(h.max_asymmetry(), 0.0);
    Ok(h)
}

/// e^{-H} / Tr e^{-H} through a full eigendecomposition, with the spectrum
/// shifted by its minimum before exponentiating so nothing overflows.
pub fn gibbs_state(h: &DenseOperator) -> Result<DenseOperator> {
    h.check_symmetric()?;
    let dim = h.dim;
    let eig = symmetric_eigen(&h.entries, dim)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig.values.iter().map(|&l| (-(l - min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = DenseOperator::zeros(dim)?;
    for r in 0..dim {
        for c in r..dim {
            let mut acc = 0.0;
            for (k, &weight) in weights.iter().enumerate() {
                acc += eig.vector_component(r, k) * weight * eig.vector_component(c, k);
            }
            let value = acc / total;
            rho.set(r, c, value);
            rho.set(c, r, value);
        }
    }
    Ok(rho)
}

/// Diagonal of the partial trace over the hidden units: the exact visible
/// distribution carried by a joint density matrix.
pub fn reduce_to_visible(rho: &DenseOperator, n_visible: usize) -> Result<VisibleDistribution> {
    let qubits = rho.dim.trailing_zeros() as usize;
    if n_visible > qubits {
        return Err(Error::ShapeMismatch {
            context: format!("{n_visible} visible units in a {qubits}-qubit operator"),
        });
    }
    let m = qubits - n_visible;
    let hidden_dim = 1usize << m;
    let mut probs = vec![0.0; 1 << n_visible];
    for (v, out) in probs.iter_mut().enumerate() {
        let base = v << m;
        for hidden in 0..hidden_dim {
            *out += rho.get(base | hidden, base | hidden);
        }
    }
    VisibleDistribution::new(n_visible, probs)
}

/// Hidden-layer state conditioned on visible configuration v: the v-block of
/// rho renormalized by its trace.
pub fn conditional_hidden_state(rho: &DenseOperator, v: &SpinConfig) -> Result<DenseOperator> {
    let qubits = rho.dim.trailing_zeros() as usize;
    if v.n() > qubits {
        return Err(Error::ShapeMismatch {
            context: format!("{} visible units in a {qubits}-qubit operator", v.n()),
        });
    }
    let m = qubits - v.n();
    let hidden_dim = 1usize << m;
    let base = v.index() << m;
    let mut block = DenseOperator::zeros(hidden_dim)?;
    for r in 0..hidden_dim {
        for c in 0..hidden_dim {
            block.set(r, c, rho.get(base | r, base | c));
        }
    }
    let trace = block.trace();
    if trace <= 0.0 {
        return Err(Error::ZeroProbabilityCondition { index: v.index() });
    }
    for e in &mut block.entries {
        *e /= trace;
    }
    Ok(block)
}

/// The block-diagonal state Σ_v P(v) |v><v| ⊗ rho_{H|v} built from a data
/// distribution and the conditional blocks of `rho`.
pub fn mixture_state(
    data: &VisibleDistribution,
    rho: &DenseOperator,
    n_visible: usize,
) -> Result<DenseOperator> {
    let qubits = rho.dim.trailing_zeros() as usize;
    if data.n_visible() != n_visible || n_visible > qubits {
        return Err(Error::ShapeMismatch {
            context: "mixture state shapes disagree".into(),
        });
    }
    let m = qubits - n_visible;
    let hidden_dim = 1usize << m;
    let mut out = DenseOperator::zeros(rho.dim)?;
    for v in 0..1usize << n_visible {
        let pv = data.prob(v);
        if pv == 0.0 {
            continue;
        }
        let cfg = SpinConfig::from_index(v, n_visible)?;
        let block = conditional_hidden_state(rho, &cfg)?;
        let base = v << m;
        for r in 0..hidden_dim {
            for c in 0..hidden_dim {
                out.set(base | r, base | c, pv * block.get(r, c));
            }
        }
    }
    Ok(out)
}

/// Tr rho (log rho - log sigma) through two eigendecompositions. Zero
/// eigenvalues of rho contribute nothing; mass of rho on the kernel of sigma
/// makes the divergence infinite.
pub fn quantum_relative_entropy(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    if rho.dim != sigma.dim {
        return Err(Error::ShapeMismatch {
            context: format!("operators of dimension {} vs {}", rho.dim, sigma.dim),
        });
    }
    rho.check_symmetric()?;
    sigma.check_symmetric()?;
    let dim = rho.dim;
    let er = symmetric_eigen(&rho.entries, dim)?;
    let es = symmetric_eigen(&sigma.entries, dim)?;

    let mut entropy_term = 0.0;
    for &l in &er.values {
        if l > 0.0 {
            entropy_term += l * l.ln();
        }
    }

    let mut cross_term = 0.0;
    for k in 0..dim {
        // weight of rho along sigma's k-th eigenvector
        let mut weight = 0.0;
        for r in 0..dim {
            let ur = es.vector_component(r, k);
            if ur == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for c in 0..dim {
                row += rho.get(r, c) * es.vector_component(c, k);
            }
            weight += ur * row;
        }
        let mu = es.values[k];
        if mu <= 0.0 {
            if weight > 1e-12 {
                return Err(Error::DivergenceInfinite {
                    index: k,
                    p: weight,
                });
            }
            continue;
        }
        cross_term += weight * mu.ln();
    }
    Ok(entropy_term - cross_term)
}

/// Exact gradient of the tractable upper-bound objective, assembled from
/// dense clamped Gibbs states and the full model state. For this model the
/// clamped Hamiltonian equals the exact conditional generator, so the result
/// must coincide with `positive_phase - negative_phase` from the closed
/// forms.
pub fn golden_thompson_bound_gradient(
    p: &Params,
    data: &VisibleDistribution,
) -> Result<GradientVector> {
    let n = p.n_visible();
    let m = p.n_hidden();
    if data.n_visible() != n {
        return Err(Error::ShapeMismatch {
            context: "data shape disagrees with parameters".into(),
        });
    }
    if n + m > MAX_QUBITS {
        return Err(Error::DimensionLimit {
            qubits: n + m,
            max: MAX_QUBITS,
        });
    }

    // model expectations from the full Gibbs state
    let h = build_hamiltonian(p)?;
    let rho = gibbs_state(&h)?;
    let dim = rho.dim();
    let mut neg = GradientVector::zeros(n, m);
    for s in 0..dim {
        let ps = rho.get(s, s);
        for i in 0..n {
            neg.b_v[i] += ps * spin_at(s, m + i);
        }
        for j in 0..m {
            neg.b_h[j] += ps * spin_at(s, j);
            neg.gamma[j] += rho.get(s, s ^ (1 << j));
            for i in 0..n {
                neg.w[i * m + j] += ps * spin_at(s, m + i) * spin_at(s, j);
            }
        }
    }

    // data-averaged expectations from dense clamped Gibbs states
    let hidden_dim = 1usize << m;
    let mut pos = GradientVector::zeros(n, m);
    for v in 0..1usize << n {
        let pv = data.prob(v);
        if pv == 0.0 {
            continue;
        }
        let mut clamped = DenseOperator::zeros(hidden_dim)?;
        for s in 0..hidden_dim {
            let mut diag = 0.0;
            for i in 0..n {
                diag -= p.b_v()[i] * spin_at(v, i);
            }
            for j in 0..m {
                let mut field = p.b_h()[j];
                for i in 0..n {
                    field += p.coupling(i, j) * spin_at(v, i);
                }
                diag -= field * spin_at(s, j);
            }
            clamped.set(s, s, diag);
            for j in 0..m {
                clamped.add(s, s ^ (1 << j), -p.gamma()[j]);
            }
        }
        let rv = gibbs_state(&clamped)?;
        for i in 0..n {
            pos.b_v[i] += pv * spin_at(v, i);
        }
        for j in 0..m {
            let mut z = 0.0;
            let mut x = 0.0;
            for s in 0..hidden_dim {
                z += rv.get(s, s) * spin_at(s, j);
                x += rv.get(s, s ^ (1 << j));
            }
            pos.b_h[j] += pv * z;
            pos.gamma[j] += pv * x;
            for i in 0..n {
                pos.w[i * m + j] += pv * spin_at(v, i) * z;
            }
        }
    }

    let mut out = GradientVector::zeros(n, m);
    for k in 0..n {
        out.b_v[k] = pos.b_v[k] - neg.b_v[k];
    }
    for j in 0..m {
        out.b_h[j] = pos.b_h[j] - neg.b_h[j];
        out.gamma[j] = pos.gamma[j] - neg.gamma[j];
    }
    for k in 0..n * m {
        out.w[k] = pos.w[k] - neg.w[k];
    }
    Ok(out)
}

/// Model expectations Tr[rho σ] for every parameter direction, used by the
/// verification command.
pub fn dense_negative_phase(p: &Params) -> Result<GradientVector> {
    let h = build_hamiltonian(p)?;
    let rho = gibbs_state(&h)?;
    let n = p.n_visible();
    let m = p.n_hidden();
    let mut g = GradientVector::zeros(n, m);
    for s in 0..rho.dim() {
        let ps = rho.get(s, s);
        for i in 0..n {
            g.b_v[i] += ps * spin_at(s, m + i);
        }
        for j in 0..m {
            g.b_h[j] += ps * spin_at(s, j);
            g.gamma[j] += rho.get(s, s ^ (1 << j));
            for i in 0..n {
                g.w[i * m + j] += ps * spin_at(s, m + i) * spin_at(s, j);
            }
        }
    }
    Ok(g)
}

/// Data-averaged expectations computed densely from the mixture state
/// P_V x rho_{H|V}, for the verification command.
pub fn dense_positive_phase(p: &Params, data: &VisibleDistribution) -> Result<GradientVector> {
    let n = p.n_visible();
    let m = p.n_hidden();
    let h = build_hamiltonian(p)?;
    let rho = gibbs_state(&h)?;
    let mixed = mixture_state(data, &rho, n)?;
    let mut g = GradientVector::zeros(n, m);
    for s in 0..mixed.dim() {
        let ps = mixed.get(s, s);
        for i in 0..n {
            g.b_v[i] += ps * spin_at(s, m + i);
        }
        for j in 0..m {
            g.b_h[j] += ps * spin_at(s, j);
            g.gamma[j] += mixed.get(s, s ^ (1 << j));
            for i in 0..n {
                g.w[i * m + j] += ps * spin_at(s, m + i) * spin_at(s, j);
            }
        }
    }
    Ok(g)
}

/// Closed-form product of per-unit clamped states, as a dense 2^M matrix;
/// the reference the dense conditional blocks are checked against.
pub fn closed_form_conditional(p: &Params, v: &SpinConfig) -> Result<DenseOperator> {
    let m = p.n_hidden();
    let mut units = Vec::with_capacity(m);
    for j in 0..m {
        let s = model::clamped_hidden_state(p, v, j)?;
        // single-unit density matrix in the sigma-z eigenbasis
        units.push([
            [(1.0 + s.mz) / 2.0, s.mx / 2.0],
            [s.mx / 2.0, (1.0 - s.mz) / 2.0],
        ]);
    }
    let dim = 1usize << m;
    let mut out = DenseOperator::zeros(dim)?;
    for r in 0..dim {
        for c in 0..dim {
            let mut prod = 1.0;
            for (j, unit) in units.iter().enumerate() {
                prod *= unit[r >> j & 1][c >> j & 1];
            }
            out.set(r, c, prod);
        }
    }
    Ok(out)
}
