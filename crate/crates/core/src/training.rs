//! The two trainers: plain gradient descent and the alternating-projection
//! (em) optimizer with its convex inner loop.
//!
//! Both move parameters along `eta * (positive phase - negative phase)`.
//! Gradient descent recomputes both phases every epoch; the em trainer fixes
//! the positive phase once per outer epoch (the e-step caches the clamped
//! conditionals of the current parameters) and then iterates the update
//! against a moving negative phase until the joint objective stops changing
//! by more than `epsilon`. With an inner budget of one step the two
//! algorithms perform bit-identical arithmetic.

use serde::{Deserialize, Serialize};

use crate::dist::{kl_divergence, VisibleDistribution};
use crate::error::{Error, Result};
use crate::model::{
    conditional_relative_entropy_term, negative_phase_with_marginal, positive_phase,
    visible_marginal, HiddenLocalState,
};
use crate::params::{GradientVector, Params};
use crate::rng::Xoshiro256StarStar;
use crate::spin::SpinConfig;

/// Which optimizer a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gd,
    Em,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Gd => write!(f, "gd"),
            Algorithm::Em => write!(f, "em"),
        }
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    /// Learning rate for both the gradient-descent step and the inner loop.
    pub eta: f64,
    /// Convergence threshold on objective changes, inner and outer.
    pub epsilon: f64,
    /// Outer epoch budget.
    pub n_epochs: usize,
    /// Inner-loop budget per outer epoch (em only).
    pub n_epochs_m: usize,
    /// Seed for the parameter initialization stream.
    pub seed: u64,
    /// Half-width of the uniform initialization interval.
    pub init_range: f64,
    /// Keep every transverse field frozen at zero (classical-RBM submodel).
    #[serde(default)]
    pub freeze_gamma: bool,
}

impl TrainConfig {
    /// Benchmark defaults: eta 0.2, epsilon 1e-7, inner budget 1000,
    /// seed 0, init range 5.
    pub fn defaults(algorithm: Algorithm, n_epochs: usize) -> Self {
        TrainConfig {
            algorithm,
            eta: 0.2,
            epsilon: 1e-7,
            n_epochs,
            n_epochs_m: 1000,
            seed: 0,
            init_range: 5.0,
            freeze_gamma: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: format!("eta = {}", self.eta),
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: format!("epsilon = {}", self.epsilon),
            });
        }
        if self.n_epochs_m < 1 {
            return Err(Error::InvalidConfig {
                reason: "inner budget n_epochs_m must be at least 1".into(),
            });
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: format!("init_range = {}", self.init_range),
            });
        }
        Ok(())
    }
}

/// Everything recorded about one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub config: TrainConfig,
    pub n_visible: usize,
    pub n_hidden: usize,
    /// KL(data || marginal) before the first epoch.
    pub initial_kl: f64,
    /// Visible KL after each completed epoch.
    pub kl_curve: Vec<f64>,
    /// Per-epoch joint-objective trace (em only): the value before the first
    /// inner update followed by the value after each inner update.
    pub joint_kl_curve: Vec<Vec<f64>>,
    /// Number of inner updates each epoch performed (em only).
    pub inner_steps_per_epoch: Vec<usize>,
    pub final_params: Params,
    pub epochs_run: usize,
    pub converged: bool,
}

impl TrainRecord {
    /// Visible KL at the end of the run (the initial KL when no epoch ran).
    pub fn final_kl(&self) -> f64 {
        self.kl_curve.last().copied().unwrap_or(self.initial_kl)
    }

    /// Per-epoch CSV: `epoch,kl,inner_steps,joint_kl_final`. The two em-only
    /// columns are empty for gradient-descent records.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("epoch,kl,inner_steps,joint_kl_final\n");
        for (e, kl) in self.kl_curve.iter().enumerate() {
            let inner = self
                .inner_steps_per_epoch
                .get(e)
                .map(|s| s.to_string())
                .unwrap_or_default();
            let joint = self
                .joint_kl_curve
                .get(e)
                .and_then(|trace| trace.last())
                .map(|j| j.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", e + 1, kl, inner, joint));
        }
        out
    }
}

/// A run that aborted on a numeric failure, carrying the partial record.
#[derive(Debug)]
pub struct TrainAbort {
    pub partial: Box<TrainRecord>,
    pub error: Error,
}

impl std::fmt::Display for TrainAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "training aborted after {} epochs: {}",
            self.partial.epochs_run, self.error
        )
    }
}

impl std::error::Error for TrainAbort {}

/// Draw initial parameters uniformly from [-range, +range), in the fixed
/// order visible biases, hidden biases, transverse fields, couplings
/// (visible-major).
pub fn init_params(
    n_visible: usize,
    n_hidden: usize,
    rng: &mut Xoshiro256StarStar,
    range: f64,
) -> Result<Params> {
    let b_v = (0..n_visible)
        .map(|_| rng.uniform_symmetric(range))
        .collect();
    let b_h = (0..n_hidden)
        .map(|_| rng.uniform_symmetric(range))
        .collect();
    let gamma = (0..n_hidden)
        .map(|_| rng.uniform_symmetric(range))
        .collect();
    let w = (0..n_visible)
        .map(|_| {
            (0..n_hidden)
                .map(|_| rng.uniform_symmetric(range))
                .collect()
        })
        .collect();
    Params::new(b_v, b_h, gamma, w)
}

/// One gradient-descent update: `p + eta * (positive - negative)`.
pub fn gd_step(p: &Params, data: &VisibleDistribution, eta: f64) -> Result<Params> {
    gd_step_inner(p, data, eta, false)
}

fn gd_step_inner(
    p: &Params,
    data: &VisibleDistribution,
    eta: f64,
    freeze_gamma: bool,
) -> Result<Params> {
    let pos = positive_phase(p, data)?;
    let marginal = visible_marginal(p);
    let neg = negative_phase_with_marginal(p, &marginal);
    p.step(&pos, &neg, eta, freeze_gamma)
}

/// The e-projection: a handle on the clamped hidden conditionals of a fixed
/// parameter set. The data-averaged statistics derived from it stay constant
/// through the following inner loop.
#[derive(Debug, Clone)]
pub struct HiddenConditional {
    params: Params,
}

impl HiddenConditional {
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Bloch data of every hidden unit conditioned on configuration v.
    pub fn bloch_row(&self, v: &SpinConfig) -> Result<Vec<HiddenLocalState>> {
        (0..self.params.n_hidden())
            .map(|j| crate::model::clamped_hidden_state(&self.params, v, j))
            .collect()
    }

    /// The four data-averaged expectation blocks, fixed for the m-step.
    pub fn averaged_stats(&self, data: &VisibleDistribution) -> Result<GradientVector> {
        positive_phase(&self.params, data)
    }
}

/// Capture the conditional hidden states of the current parameters.
pub fn e_step(p_t: &Params) -> HiddenConditional {
    HiddenConditional {
        params: p_t.clone(),
    }
}

/// Result of one m-step: the minimizing parameters plus the objective trace.
#[derive(Debug, Clone)]
pub struct MStepOutcome {
    pub params: Params,
    pub inner_steps: usize,
    pub final_joint_kl: f64,
    /// Objective before the first inner update, then after each update.
    pub trace: Vec<f64>,
}

/// Minimize the joint objective over the parameter family with the hidden
/// conditionals frozen at `p_t`: repeated updates against the cached
/// positive phase until the objective change falls below `cfg.epsilon` or
/// the inner budget runs out.
pub fn m_step(p_t: &Params, data: &VisibleDistribution, cfg: &TrainConfig) -> Result<MStepOutcome> {
    let cached_pos = positive_phase(p_t, data)?;
    m_step_cached(p_t, &cached_pos, data, cfg)
}

fn m_step_cached(
    p_t: &Params,
    cached_pos: &GradientVector,
    data: &VisibleDistribution,
    cfg: &TrainConfig,
) -> Result<MStepOutcome> {
    let mut theta = p_t.clone();
    let mut marginal = visible_marginal(&theta);
    let mut objective =
        conditional_relative_entropy_term(p_t, &theta, data)? + kl_divergence(data, &marginal)?;
    let mut trace = vec![objective];
    let mut inner_steps = 0;
    loop {
        let neg = negative_phase_with_marginal(&theta, &marginal);
        theta = theta.step(cached_pos, &neg, cfg.eta, cfg.freeze_gamma)?;
        inner_steps += 1;
        marginal = visible_marginal(&theta);
        let next =
            conditional_relative_entropy_term(p_t, &theta, data)? + kl_divergence(data, &marginal)?;
        if !next.is_finite() {
            return Err(Error::Numeric {
                what: format!("joint objective became {next} at inner step {inner_steps}"),
            });
        }
        let delta = next - objective;
        objective = next;
        trace.push(next);
        if delta.abs() < cfg.epsilon || inner_steps >= cfg.n_epochs_m {
            break;
        }
    }
    Ok(MStepOutcome {
        params: theta,
        inner_steps,
        final_joint_kl: objective,
        trace,
    })
}

/// Train from freshly drawn initial parameters (seeded by `cfg.seed`).
pub fn train(
    data: &VisibleDistribution,
    n_hidden: usize,
    cfg: &TrainConfig,
) -> std::result::Result<TrainRecord, TrainAbort> {
    let mut rng = Xoshiro256StarStar::new(cfg.seed);
    let init = match init_params(data.n_visible(), n_hidden, &mut rng, cfg.init_range) {
        Ok(p) => p,
        Err(error) => {
            return Err(TrainAbort {
                partial: Box::new(empty_record(data, n_hidden, cfg)),
                error,
            })
        }
    };
    train_with_init(data, cfg, init)
}

fn empty_record(data: &VisibleDistribution, n_hidden: usize, cfg: &TrainConfig) -> TrainRecord {
    TrainRecord {
        config: cfg.clone(),
        n_visible: data.n_visible(),
        n_hidden,
        initial_kl: f64::NAN,
        kl_curve: Vec::new(),
        joint_kl_curve: Vec::new(),
        inner_steps_per_epoch: Vec::new(),
        final_params: Params::zeros(data.n_visible(), n_hidden)
            .expect("shape was already validated"),
        epochs_run: 0,
        converged: false,
    }
}

/// Run the configured optimizer from explicit initial parameters.
///
/// Both branches record the visible KL after every epoch and stop early once
/// an epoch changes it by less than `epsilon`; the em branch additionally
/// records the joint-objective trace of each inner loop. A numeric failure
/// aborts with the partial record preserved.
pub fn train_with_init(
    data: &VisibleDistribution,
    cfg: &TrainConfig,
    init: Params,
) -> std::result::Result<TrainRecord, TrainAbort> {
    let n_hidden = init.n_hidden();
    let mut record = empty_record(data, n_hidden, cfg);
    record.final_params = init;

    let abort = |record: &TrainRecord, error: Error| TrainAbort {
        partial: Box::new(record.clone()),
        error,
    };

    if let Err(e) = cfg.validate() {
        return Err(abort(&record, e));
    }
    if data.n_visible() != record.final_params.n_visible() {
        return Err(abort(
            &record,
            Error::ShapeMismatch {
                context: "data shape disagrees with initial parameters".into(),
            },
        ));
    }

    let visible_kl = |params: &Params| -> Result<f64> {
        let kl = kl_divergence(data, &visible_marginal(params))?;
        if !kl.is_finite() {
            return Err(Error::Numeric {
                what: format!("visible KL became {kl}"),
            });
        }
        Ok(kl)
    };

    record.initial_kl = match visible_kl(&record.final_params) {
        Ok(k) => k,
        Err(e) => return Err(abort(&record, e)),
    };

    let mut prev_kl = record.initial_kl;
    for _epoch in 0..cfg.n_epochs {
        match cfg.algorithm {
            Algorithm::Gd => {
                match gd_step_inner(&record.final_params, data, cfg.eta, cfg.freeze_gamma) {
                    Ok(next) => record.final_params = next,
                    Err(e) => return Err(abort(&record, e)),
                }
            }
            Algorithm::Em => {
                let conditionals = e_step(&record.final_params);
                let cached_pos = match conditionals.averaged_stats(data) {
                    Ok(g) => g,
                    Err(e) => return Err(abort(&record, e)),
                };
                match m_step_cached(&record.final_params, &cached_pos, data, cfg) {
                    Ok(outcome) => {
                        record.final_params = outcome.params;
                        record.inner_steps_per_epoch.push(outcome.inner_steps);
                        record.joint_kl_curve.push(outcome.trace);
                    }
                    Err(e) => return Err(abort(&record, e)),
                }
            }
        }
        let kl = match visible_kl(&record.final_params) {
            Ok(k) => k,
            Err(e) => return Err(abort(&record, e)),
        };
        record.kl_curve.push(kl);
        record.epochs_run += 1;
        if (prev_kl - kl).abs() < cfg.epsilon {
            record.converged = true;
            break;
        }
        prev_kl = kl;
    }
    Ok(record)
}
