//! Generators for the four benchmark distributions.
//!
//! Bit/spin convention: bit value 1 in a configuration index corresponds to
//! spin -1, so "cardinality" and "parity" count the -1 spins of a
//! configuration.

use serde::{Deserialize, Serialize};

use crate::dist::VisibleDistribution;
use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;
use crate::spin::MAX_UNITS;

/// Which benchmark distribution to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// Uniform average of K Bernoulli peaks around random centers.
    BernoulliMixture,
    /// Uniform over min(n^2, 2^n) distinct random bitstrings.
    RandomSupport,
    /// Uniform over bitstrings with exactly n/2 spins equal to -1.
    Cardinality,
    /// Uniform over bitstrings with an even number of -1 spins.
    Parity,
}

impl std::fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            DatasetKind::BernoulliMixture => "bernoulli_mixture",
            DatasetKind::RandomSupport => "random_support",
            DatasetKind::Cardinality => "cardinality",
            DatasetKind::Parity => "parity",
        };
        write!(f, "{name}")
    }
}

/// Full description of a benchmark dataset; generation is a pure function
/// of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n: usize,
    /// Mixture components (Bernoulli mixture only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Alignment probability (Bernoulli mixture only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_UNITS {
            return Err(Error::InvalidDatasetSpec {
                reason: format!("n = {} outside 1..={MAX_UNITS}", self.n),
            });
        }
        match self.kind {
            DatasetKind::BernoulliMixture => {
                let k = self.k.ok_or_else(|| Error::InvalidDatasetSpec {
                    reason: "bernoulli_mixture requires k".into(),
                })?;
                if k == 0 || k > 1 << self.n {
                    return Err(Error::InvalidDatasetSpec {
                        reason: format!("k = {k} outside 1..=2^{}", self.n),
                    });
                }
                let p = self.p.ok_or_else(|| Error::InvalidDatasetSpec {
                    reason: "bernoulli_mixture requires p".into(),
                })?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidDatasetSpec {
                        reason: format!("p = {p} outside (0, 1)"),
                    });
                }
            }
            DatasetKind::Cardinality => {
                if !self.n.is_multiple_of(2) {
                    return Err(Error::InvalidDatasetSpec {
                        reason: format!("cardinality requires even n, got {}", self.n),
                    });
                }
            }
            DatasetKind::RandomSupport | DatasetKind::Parity => {}
        }
        Ok(())
    }

    /// Generate the distribution, plus the mixture centers when applicable.
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        match self.kind {
            DatasetKind::BernoulliMixture => {
                gen_bernoulli_mixture(self.n, self.k.unwrap(), self.p.unwrap(), self.seed)
            }
            DatasetKind::RandomSupport => Ok(Dataset {
                dist: gen_random_support(self.n, self.seed)?,
                centers: None,
            }),
            DatasetKind::Cardinality => Ok(Dataset {
                dist: gen_cardinality(self.n)?,
                centers: None,
            }),
            DatasetKind::Parity => Ok(Dataset {
                dist: gen_parity(self.n)?,
                centers: None,
            }),
        }
    }
}

/// A generated distribution together with the center bitstrings that
/// produced it (Bernoulli mixture only).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dist: VisibleDistribution,
    pub centers: Option<Vec<Vec<i8>>>,
}

/// On-disk shape of a dataset: the distribution table plus an echo of the
/// generating spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub n_visible: usize,
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DatasetEcho>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEcho {
    #[serde(flatten)]
    pub spec: DatasetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<i8>>>,
}

impl DatasetFile {
    pub fn new(dataset: &Dataset, spec: &DatasetSpec) -> Self {
        DatasetFile {
            n_visible: dataset.dist.n_visible(),
            probs: dataset.dist.probs().to_vec(),
            spec: Some(DatasetEcho {
                spec: spec.clone(),
                centers: dataset.centers.clone(),
            }),
        }
    }

    pub fn distribution(&self) -> Result<VisibleDistribution> {
        VisibleDistribution::new(self.n_visible, self.probs.clone())
    }
}

/// Uniform average of `k` Bernoulli peaks: each center contributes
/// p^(n-d) (1-p)^d at Hamming distance d. Centers are drawn with
/// replacement, one index per draw from the low n bits of the stream.
pub fn gen_bernoulli_mixture(n: usize, k: usize, p: f64, seed: u64) -> Result<Dataset> {
    let spec = DatasetSpec {
        kind: DatasetKind::BernoulliMixture,
        n,
        k: Some(k),
        p: Some(p),
        seed,
    };
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::new(seed);
    let mask = (1usize << n) - 1;
    let centers: Vec<usize> = (0..k).map(|_| rng.next_u64() as usize & mask).collect();

    let len = 1usize << n;
    let mut weights = vec![0.0; len];
    for (v, weight) in weights.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &center in &centers {
            let d = (v ^ center).count_ones() as i32;
            acc += p.powi(n as i32 - d) * (1.0 - p).powi(d);
        }
        *weight = acc / k as f64;
    }
    let dist = VisibleDistribution::from_weights(n, weights)?;
    let center_spins = centers
        .iter()
        .map(|&c| {
            (0..n)
                .map(|bit| if c >> bit & 1 == 0 { 1i8 } else { -1i8 })
                .collect()
        })
        .collect();
    Ok(Dataset {
        dist,
        centers: Some(center_spins),
    })
}

/// Uniform distribution over min(n^2, 2^n) distinct bitstrings, chosen by a
/// seeded partial Fisher-Yates shuffle over all indices.
pub fn gen_random_support(n: usize, seed: u64) -> Result<VisibleDistribution> {
    let spec = DatasetSpec {
        kind: DatasetKind::RandomSupport,
        n,
        k: None,
        p: None,
        seed,
    };
    spec.validate()?;
    let len = 1usize << n;
    let support = (n * n).min(len);
    let mut rng = Xoshiro256StarStar::new(seed);
    let mut indices: Vec<u32> = (0..len as u32).collect();
    for i in 0..support {
        let j = i + rng.next_index(len - i);
        indices.swap(i, j);
    }
    let mut weights = vec![0.0; len];
    for &idx in &indices[..support] {
        weights[idx as usize] = 1.0;
    }
    VisibleDistribution::from_weights(n, weights)
}

/// Uniform over configurations with exactly n/2 spins equal to -1.
pub fn gen_cardinality(n: usize) -> Result<VisibleDistribution> {
    let spec = DatasetSpec {
        kind: DatasetKind::Cardinality,
        n,
        k: None,
        p: None,
        seed: 0,
    };
    spec.validate()?;
    let len = 1usize << n;
    let target = (n / 2) as u32;
    let weights: Vec<f64> = (0..len)
        .map(|v| if v.count_ones() == target { 1.0 } else { 0.0 })
        .collect();
    VisibleDistribution::from_weights(n, weights)
}

/// Uniform over configurations with an even number of -1 spins.
pub fn gen_parity(n: usize) -> Result<VisibleDistribution> {
    let spec = DatasetSpec {
        kind: DatasetKind::Parity,
        n,
        k: None,
        p: None,
        seed: 0,
    };
    spec.validate()?;
    let len = 1usize << n;
    let weights: Vec<f64> = (0..len)
        .map(|v| if v.count_ones() % 2 == 0 { 1.0 } else { 0.0 })
        .collect();
    VisibleDistribution::from_weights(n, weights)
}
