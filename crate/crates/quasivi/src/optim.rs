//! Optimization drivers.
//!
//! `run` ascends the ELBO with fixed-step SGD or Adam, drawing a fresh
//! uniform batch every iteration with a step-indexed seed so that schedules
//! and sequence kinds are comparable across runs with the same master seed.
//! The per-iteration sample count follows either a fixed size or the
//! geometric schedule `N_t = n_floor + ceil(tau^t)`.

use crate::estimators::Estimator;
use crate::families::{FamilySpec, VarParams};
use crate::lds::{generate, SequenceSource, SourceKind};
use crate::models::ModelInstance;
use crate::seeds::derive_seed;
use crate::{Error, Result};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sgd,
    Adam,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Algorithm::Sgd),
            "adam" => Ok(Algorithm::Adam),
            other => Err(Error::InvalidConfig(format!("unknown optimizer `{other}`"))),
        }
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub algorithm: Algorithm,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub max_iters: usize,
    /// Stop when `|elbo_t - elbo_{t-1}| <= stop_tol`; 0 runs to `max_iters`.
    pub stop_tol: f64,
}

impl OptimConfig {
    pub fn sgd(step_size: f64, max_iters: usize) -> Self {
        OptimConfig {
            algorithm: Algorithm::Sgd,
            step_size,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            max_iters,
            stop_tol: 0.0,
        }
    }

    pub fn adam(step_size: f64, max_iters: usize) -> Self {
        OptimConfig {
            algorithm: Algorithm::Adam,
            ..Self::sgd(step_size, max_iters)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_size <= 0.0 {
            return Err(Error::InvalidConfig("step size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("Adam betas must lie in [0, 1)".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if self.stop_tol < 0.0 {
            return Err(Error::InvalidConfig("stop_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-iteration sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSchedule {
    Fixed(usize),
    /// `N_t = n_floor + ceil(tau^t)` with `tau > 1`.
    Geometric { n_floor: usize, tau: f64 },
}

impl SampleSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SampleSchedule::Fixed(n) if n >= 1 => Ok(()),
            SampleSchedule::Fixed(_) => {
                Err(Error::InvalidConfig("fixed sample size must be >= 1".into()))
            }
            SampleSchedule::Geometric { n_floor, tau } => {
                if n_floor < 1 {
                    return Err(Error::InvalidConfig("n_floor must be >= 1".into()));
                }
                if tau <= 1.0 {
                    return Err(Error::InvalidConfig("tau must exceed 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Sample count at iteration `t` (0-based).
    pub fn n_at(&self, t: usize) -> usize {
        match *self {
            SampleSchedule::Fixed(n) => n,
            SampleSchedule::Geometric { n_floor, tau } => {
                n_floor + tau.powi(t as i32).ceil() as usize
            }
        }
    }
}

/// One optimization step as recorded in a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub n_t: usize,
    pub elbo_est: f64,
    pub grad_norm: f64,
    pub wall_ns: u64,
    pub lambda_snapshot: Option<Vec<f64>>,
}

/// Full run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub estimator: Estimator,
    pub source: SourceKind,
    pub optim: OptimConfig,
    pub schedule: SampleSchedule,
    pub master_seed: u64,
    /// Record a parameter snapshot every `k` steps (0 = only implicitly via
    /// the returned final parameters).
    pub snapshot_every: usize,
    /// First Sobol index to emit for QMC-based sources.
    pub skip: usize,
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<TraceRecord>,
    pub final_params: VarParams,
    /// Present when the run stopped on a non-finite gradient.
    pub abort: Option<String>,
    /// Total samples drawn across all iterations.
    pub total_samples: u64,
}

/// First-order ascent loop on the ELBO.
pub fn run(
    model: &ModelInstance,
    spec: &FamilySpec,
    init: &VarParams,
    cfg: &RunConfig,
) -> Result<RunResult> {
    cfg.optim.validate()?;
    cfg.schedule.validate()?;
    if init.len() != spec.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.param_dim(),
            got: init.len(),
        });
    }

    let mut params = init.clone();
    let mut adam = AdamState::new(spec.param_dim());
    let mut trace = Vec::with_capacity(cfg.optim.max_iters);
    let mut prev_elbo: Option<f64> = None;
    let mut total_samples = 0u64;
    let mut abort = None;
    let started = Instant::now();

    for t in 0..cfg.optim.max_iters {
        let n_t = cfg.schedule.n_at(t);
        total_samples += n_t as u64;
        let source = SequenceSource {
            kind: cfg.source,
            d: spec.latent_dim(),
            seed: derive_seed(cfg.master_seed, t as u64),
            skip: cfg.skip,
        };
        let batch = generate(&source, n_t)?;
        let est = cfg
            .estimator
            .estimate(model, spec, &params, &batch, source)?;

        let grad_norm = est.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let record_snapshot = cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0;
        if !grad_norm.is_finite() {
            trace.push(TraceRecord {
                t,
                n_t,
                elbo_est: est.elbo_estimate,
                grad_norm,
                wall_ns: started.elapsed().as_nanos() as u64,
                lambda_snapshot: Some(params.values().to_vec()),
            });
            abort = Some(format!(
                "non-finite gradient at iteration {t} ({} support violations)",
                est.support_violations
            ));
            break;
        }

        match cfg.optim.algorithm {
            Algorithm::Sgd => {
                for (p, g) in params.values_mut().iter_mut().zip(&est.grad) {
                    *p += cfg.optim.step_size * g;
                }
            }
            Algorithm::Adam => adam_step(
                &mut adam,
                params.values_mut(),
                &est.grad,
                cfg.optim.step_size,
                cfg.optim.beta1,
                cfg.optim.beta2,
                cfg.optim.adam_eps,
            ),
        }

        trace.push(TraceRecord {
            t,
            n_t,
            elbo_est: est.elbo_estimate,
            grad_norm,
            wall_ns: started.elapsed().as_nanos() as u64,
            lambda_snapshot: record_snapshot.then(|| params.values().to_vec()),
        });

        if cfg.optim.stop_tol > 0.0 {
            if let Some(prev) = prev_elbo {
                if (est.elbo_estimate - prev).abs() <= cfg.optim.stop_tol {
                    break;
                }
            }
        }
        prev_elbo = Some(est.elbo_estimate);
    }

    Ok(RunResult {
        trace,
        final_params: params,
        abort,
        total_samples,
    })
}

/// Adam moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }
}

/// One bias-corrected Adam ascent step: `params += alpha * mhat / (sqrt(vhat) + eps)`.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grad: &[f64],
    alpha: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    assert_eq!(state.m.len(), grad.len());
    assert_eq!(params.len(), grad.len());
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    for i in 0..grad.len() {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        let mhat = state.m[i] / bc1;
        let vhat = state.v[i] / bc2;
        params[i] += alpha * mhat / (vhat.sqrt() + eps);
    }
}
