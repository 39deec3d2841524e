//! Exact probability tables over all 2^N visible configurations, and the
//! classical KL divergence between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::MAX_UNITS;

/// Tolerance for the sum-to-one check on probability tables.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A dense probability table indexed by configuration index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct VisibleDistribution {
    n_visible: usize,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    n_visible: usize,
    probs: Vec<f64>,
}

impl TryFrom<DistRepr> for VisibleDistribution {
    type Error = Error;

    fn try_from(r: DistRepr) -> Result<Self> {
        VisibleDistribution::new(r.n_visible, r.probs)
    }
}

impl From<VisibleDistribution> for DistRepr {
    fn from(d: VisibleDistribution) -> Self {
        DistRepr {
            n_visible: d.n_visible,
            probs: d.probs,
        }
    }
}

impl VisibleDistribution {
    /// Validate and wrap a probability table: non-negative entries summing to
    /// one within [`NORMALIZATION_TOL`].
    pub fn new(n_visible: usize, probs: Vec<f64>) -> Result<Self> {
        if n_visible == 0 || n_visible > MAX_UNITS {
            return Err(Error::LengthOutOfRange {
                len: n_visible,
                max: MAX_UNITS,
            });
        }
        if probs.len() != 1 << n_visible {
            return Err(Error::InvalidDistribution {
                reason: format!(
                    "expected 2^{} = {} entries, got {}",
                    n_visible,
                    1usize << n_visible,
                    probs.len()
                ),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution {
                    reason: format!("entry {i} is {p}"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution {
                reason: format!("probabilities sum to {sum}"),
            });
        }
        Ok(VisibleDistribution { n_visible, probs })
    }

    /// Normalize non-negative weights into a distribution.
    pub fn from_weights(n_visible: usize, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::InvalidDistribution {
                reason: format!("weights sum to {sum}"),
            });
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        VisibleDistribution::new(n_visible, probs)
    }

    /// Wrap a table that is normalized by construction, skipping validation.
    /// Overflowed inputs may carry NaN entries here; callers detect those
    /// downstream through non-finite objective values.
    pub(crate) fn from_normalized(n_visible: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), 1 << n_visible);
        let sum: f64 = probs.iter().sum();
        debug_assert!(!sum.is_finite() || (sum - 1.0).abs() < 1e-9);
        VisibleDistribution { n_visible, probs }
    }

    pub fn uniform(n_visible: usize) -> Result<Self> {
        let len = 1usize << n_visible;
        VisibleDistribution::new(n_visible, vec![1.0 / len as f64; len])
    }

    pub fn point_mass(n_visible: usize, index: usize) -> Result<Self> {
        let len = 1usize.checked_shl(n_visible as u32).unwrap_or(0);
        if index >= len {
            return Err(Error::IndexOutOfRange {
                what: "point mass",
                index,
                size: len,
            });
        }
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        VisibleDistribution::new(n_visible, probs)
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Number of configurations with strictly positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Shannon entropy in nats, with the 0 log 0 = 0 convention.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

/// Σ_v p(v) (log p(v) - log q(v)), with 0 log 0 = 0.
///
/// Errors when p puts mass where q has none (the divergence is infinite).
pub fn kl_divergence(p: &VisibleDistribution, q: &VisibleDistribution) -> Result<f64> {
    if p.n_visible != q.n_visible {
        return Err(Error::ShapeMismatch {
            context: format!(
                "kl_divergence over {} vs {} visible units",
                p.n_visible, q.n_visible
            ),
        });
    }
    let mut acc = 0.0;
    for (i, (&pv, &qv)) in p.probs.iter().zip(q.probs.iter()).enumerate() {
        if pv > 0.0 {
            if qv <= 0.0 {
                return Err(Error::DivergenceInfinite { index: i, p: pv });
            }
            acc += pv * (pv.ln() - qv.ln());
        }
    }
    Ok(acc)
}
