//! Trainable parameters of the semi-quantum RBM and matching gradient
//! vectors.
//!
//! A parameter set holds visible biases, hidden biases, transverse fields
//! (one per hidden unit) and the visible-hidden coupling matrix. Gradient
//! vectors share the layout so updates are plain entrywise arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::MAX_UNITS;

/// All trainable parameters. Couplings are stored flat in visible-major
/// order: `w[i * n_hidden + j]` couples visible unit i to hidden unit j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct Params {
    pub(crate) n_visible: usize,
    pub(crate) n_hidden: usize,
    pub(crate) b_v: Vec<f64>,
    pub(crate) b_h: Vec<f64>,
    pub(crate) gamma: Vec<f64>,
    pub(crate) w: Vec<f64>,
}

/// JSON shape: couplings as a nested array of visible-major rows.
#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n_visible: usize,
    n_hidden: usize,
    b_v: Vec<f64>,
    b_h: Vec<f64>,
    gamma: Vec<f64>,
    w: Vec<Vec<f64>>,
}

impl TryFrom<ParamsRepr> for Params {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        if r.b_v.len() != r.n_visible || r.b_h.len() != r.n_hidden {
            return Err(Error::ShapeMismatch {
                context: "bias lengths disagree with declared shape".into(),
            });
        }
        Params::new(r.b_v, r.b_h, r.gamma, r.w)
    }
}

impl From<Params> for ParamsRepr {
    fn from(p: Params) -> Self {
        let w = (0..p.n_visible)
            .map(|i| p.w[i * p.n_hidden..(i + 1) * p.n_hidden].to_vec())
            .collect();
        ParamsRepr {
            n_visible: p.n_visible,
            n_hidden: p.n_hidden,
            b_v: p.b_v,
            b_h: p.b_h,
            gamma: p.gamma,
            w,
        }
    }
}

impl Params {
    /// Build from explicit vectors; `w` is given as visible-major rows.
    /// Shapes are inferred from the bias lengths and every entry must be
    /// finite.
    pub fn new(b_v: Vec<f64>, b_h: Vec<f64>, gamma: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        let n = b_v.len();
        let m = b_h.len();
        if n == 0 || n > MAX_UNITS {
            return Err(Error::LengthOutOfRange {
                len: n,
                max: MAX_UNITS,
            });
        }
        if gamma.len() != m {
            return Err(Error::ShapeMismatch {
                context: format!("{} transverse fields for {} hidden units", gamma.len(), m),
            });
        }
        if w.len() != n || w.iter().any(|row| row.len() != m) {
            return Err(Error::ShapeMismatch {
                context: format!("coupling matrix is not {n}x{m}"),
            });
        }
        let flat: Vec<f64> = w.into_iter().flatten().collect();
        let p = Params {
            n_visible: n,
            n_hidden: m,
            b_v,
            b_h,
            gamma,
            w: flat,
        };
        for (label, value) in p.labeled_entries() {
            if !value.is_finite() {
                return Err(Error::Numeric {
                    what: format!("parameter {label} is {value}"),
                });
            }
        }
        Ok(p)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Result<Self> {
        Params::new(
            vec![0.0; n_visible],
            vec![0.0; n_hidden],
            vec![0.0; n_hidden],
            vec![vec![0.0; n_hidden]; n_visible],
        )
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn b_v(&self) -> &[f64] {
        &self.b_v
    }

    pub fn b_h(&self) -> &[f64] {
        &self.b_h
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n_hidden + j]
    }

    /// Set every transverse field to zero (the classical-RBM submodel).
    pub fn zero_gamma(&mut self) {
        for g in &mut self.gamma {
            *g = 0.0;
        }
    }

    /// Entries in the fixed draw/flatten order: b_v, b_h, gamma, then
    /// couplings visible-major.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.b_v);
        out.extend_from_slice(&self.b_h);
        out.extend_from_slice(&self.gamma);
        out.extend_from_slice(&self.w);
        out
    }

    /// Rebuild from the [`flatten`](Self::flatten) layout.
    pub fn from_flat(n_visible: usize, n_hidden: usize, flat: &[f64]) -> Result<Self> {
        let expect = n_visible + 2 * n_hidden + n_visible * n_hidden;
        if flat.len() != expect {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "flat parameter vector has {} of {expect} entries",
                    flat.len()
                ),
            });
        }
        let (bv, rest) = flat.split_at(n_visible);
        let (bh, rest) = rest.split_at(n_hidden);
        let (g, w) = rest.split_at(n_hidden);
        Params::new(
            bv.to_vec(),
            bh.to_vec(),
            g.to_vec(),
            (0..n_visible)
                .map(|i| w[i * n_hidden..(i + 1) * n_hidden].to_vec())
                .collect(),
        )
    }

    /// Total number of trainable entries.
    pub fn len(&self) -> usize {
        self.n_visible + 2 * self.n_hidden + self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn labeled_entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        let m = self.n_hidden;
        self.b_v
            .iter()
            .enumerate()
            .map(|(i, &x)| (format!("b_v[{i}]"), x))
            .chain(
                self.b_h
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| (format!("b_h[{j}]"), x)),
            )
            .chain(
                self.gamma
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| (format!("gamma[{j}]"), x)),
            )
            .chain(
                self.w
                    .iter()
                    .enumerate()
                    .map(move |(k, &x)| (format!("w[{}][{}]", k / m.max(1), k % m.max(1)), x)),
            )
    }

    /// One ascent step along `pos - neg`. When `freeze_gamma` is set the
    /// transverse fields are excluded from the update. Errors if any updated
    /// entry is non-finite, naming the offending entry.
    pub(crate) fn step(
        &self,
        pos: &GradientVector,
        neg: &GradientVector,
        eta: f64,
        freeze_gamma: bool,
    ) -> Result<Params> {
        debug_assert_eq!(self.n_visible, pos.n_visible);
        debug_assert_eq!(self.n_hidden, pos.n_hidden);
        let mut out = self.clone();
        for i in 0..self.n_visible {
            out.b_v[i] += eta * (pos.b_v[i] - neg.b_v[i]);
        }
        for j in 0..self.n_hidden {
            out.b_h[j] += eta * (pos.b_h[j] - neg.b_h[j]);
            if !freeze_gamma {
                out.gamma[j] += eta * (pos.gamma[j] - neg.gamma[j]);
            }
        }
        for k in 0..self.w.len() {
            out.w[k] += eta * (pos.w[k] - neg.w[k]);
        }
        for (label, value) in out.labeled_entries() {
            if !value.is_finite() {
                return Err(Error::Numeric {
                    what: format!("update produced non-finite entry {label}"),
                });
            }
        }
        Ok(out)
    }
}

/// Per-parameter expectation values (one entry per trainable parameter),
/// produced by the positive and negative phases.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub(crate) n_visible: usize,
    pub(crate) n_hidden: usize,
    pub(crate) b_v: Vec<f64>,
    pub(crate) b_h: Vec<f64>,
    pub(crate) gamma: Vec<f64>,
    pub(crate) w: Vec<f64>,
}

impl GradientVector {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        GradientVector {
            n_visible,
            n_hidden,
            b_v: vec![0.0; n_visible],
            b_h: vec![0.0; n_hidden],
            gamma: vec![0.0; n_hidden],
            w: vec![0.0; n_visible * n_hidden],
        }
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn b_v(&self) -> &[f64] {
        &self.b_v
    }

    pub fn b_h(&self) -> &[f64] {
        &self.b_h
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n_hidden + j]
    }

    /// Entries in the same order as [`Params::flatten`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_visible + 2 * self.n_hidden + self.w.len());
        out.extend_from_slice(&self.b_v);
        out.extend_from_slice(&self.b_h);
        out.extend_from_slice(&self.gamma);
        out.extend_from_slice(&self.w);
        out
    }

    /// Largest absolute entrywise difference against another vector.
    pub fn max_abs_diff(&self, other: &GradientVector) -> f64 {
        self.flatten()
            .iter()
            .zip(other.flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
