//! Measurement harness: gradient-variance resampling, high-precision ELBO
//! evaluation, log-log rate fitting and the smooth integration study used
//! to verify MC/QMC/RQMC convergence rates.

use crate::estimators::{self, Estimator};
use crate::families::{FamilySpec, VarParams};
use crate::lds::{generate, randomize, RandomizeMode, SequenceSource, SourceKind, UniformBatch};
use crate::models::ModelInstance;
use crate::seeds::derive_seed;
use crate::{Error, Result};

/// Stream salt separating diagnostic seeds from optimization seeds.
const VARIANCE_STREAM: u64 = 0x5641_5249; // "VARI"
const ELBO_STREAM: u64 = 0x454c_424f; // "ELBO"

/// Empirical per-coordinate variance of a gradient estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub lambda: Vec<f64>,
    pub n: usize,
    pub resamples: usize,
    pub trace_of_variance: f64,
    pub per_coordinate_variance: Vec<f64>,
    /// Resamples discarded for non-finite entries (at most 1% tolerated).
    pub nonfinite: usize,
}

/// Estimates `tr Var[g_N]` by drawing `resamples` independent batches.
///
/// Each resample uses a fresh seed derived from `seed`, on a stream
/// distinct from optimization batches. The per-coordinate variances are the
/// unbiased sample variances over resamples.
pub fn grad_variance(
    model: &ModelInstance,
    spec: &FamilySpec,
    params: &VarParams,
    estimator: &Estimator,
    source: SourceKind,
    n: usize,
    resamples: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if resamples < 2 {
        return Err(Error::InvalidConfig("need at least 2 resamples".into()));
    }
    let dim = spec.param_dim();
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut kept = 0usize;
    let mut nonfinite = 0usize;

    for r in 0..resamples {
        let src = SequenceSource {
            kind: source,
            d: spec.latent_dim(),
            seed: derive_seed(derive_seed(seed, VARIANCE_STREAM), r as u64),
            skip: 0,
        };
        let batch = generate(&src, n)?;
        let est = estimator.estimate(model, spec, params, &batch, src)?;
        if est.grad.iter().any(|g| !g.is_finite()) {
            nonfinite += 1;
            continue;
        }
        kept += 1;
        let kf = kept as f64;
        for i in 0..dim {
            let delta = est.grad[i] - mean[i];
            mean[i] += delta / kf;
            m2[i] += delta * (est.grad[i] - mean[i]);
        }
    }

    if nonfinite * 100 > resamples {
        return Err(Error::TooManyNonFinite {
            count: nonfinite,
            total: resamples,
        });
    }
    let per_coordinate_variance: Vec<f64> = m2
        .iter()
        .map(|&s| if kept > 1 { s / (kept as f64 - 1.0) } else { 0.0 })
        .collect();
    Ok(VarianceReport {
        lambda: params.values().to_vec(),
        n,
        resamples,
        trace_of_variance: per_coordinate_variance.iter().sum(),
        per_coordinate_variance,
        nonfinite,
    })
}

/// Least-squares fit of `log(value)` against `log(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits a power law to `(n, value)` points; all values must be positive and
/// at least four points are required.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit {
            min: 4,
            got: points.len(),
        });
    }
    for &(n, v) in points {
        if n <= 0.0 || v <= 0.0 {
            return Err(Error::Domain {
                value: v.min(n),
                domain: "(0, inf)",
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

/// High-precision ELBO estimate: 10,000 MC samples at a pinned evaluation
/// seed. Returns the estimate and its standard error.
pub const ELBO_EVAL_SAMPLES: usize = 10_000;

pub fn elbo_highprec(
    model: &ModelInstance,
    spec: &FamilySpec,
    params: &VarParams,
    eval_seed: u64,
) -> Result<(f64, f64)> {
    let src = SequenceSource {
        kind: SourceKind::Mc,
        d: spec.latent_dim(),
        seed: derive_seed(eval_seed, ELBO_STREAM),
        skip: 0,
    };
    let batch = generate(&src, ELBO_EVAL_SAMPLES)?;
    let terms = estimators::elbo_terms(model, spec, params, &batch)?;
    let nf = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / nf;
    let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

/// The smooth product integrand `prod_j (1 + 0.3 (u_j - 0.5))` whose exact
/// integral over the unit cube is 1.
pub fn smooth_integrand(u: &[f64]) -> f64 {
    u.iter().map(|&x| 1.0 + 0.3 * (x - 0.5)).product()
}

/// One row of the integration-rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationPoint {
    pub n: usize,
    pub mc_var: f64,
    pub rqmc_var: f64,
    pub qmc_abs_err: f64,
    pub mc_rmse: f64,
}

/// Variance of the sample mean of the smooth integrand under MC and
/// scrambled-Sobol sampling, plus the deterministic QMC error, for each
/// requested `n`. `randomizations` controls the replication count.
pub fn integration_rates(
    d: usize,
    ns: &[usize],
    randomizations: usize,
    seed: u64,
) -> Result<Vec<IntegrationPoint>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut mc_means = Vec::with_capacity(randomizations);
        let mut rqmc_means = Vec::with_capacity(randomizations);
        let base = generate(&SequenceSource::new(SourceKind::QmcSobol, d), n)?;
        for r in 0..randomizations {
            let s = derive_seed(seed, (n as u64) << 20 | r as u64);
            let mc = generate(&SequenceSource::new(SourceKind::Mc, d).with_seed(s), n)?;
            mc_means.push(batch_mean(&mc));
            let rq = randomize(&base, RandomizeMode::Scramble, s);
            rqmc_means.push(batch_mean(&rq));
        }
        let qmc_abs_err = (batch_mean(&base) - 1.0).abs();
        let mc_mse =
            mc_means.iter().map(|m| (m - 1.0) * (m - 1.0)).sum::<f64>() / randomizations as f64;
        out.push(IntegrationPoint {
            n,
            mc_var: sample_variance(&mc_means),
            rqmc_var: sample_variance(&rqmc_means),
            qmc_abs_err,
            mc_rmse: mc_mse.sqrt(),
        });
    }
    Ok(out)
}

fn batch_mean(batch: &UniformBatch) -> f64 {
    batch.rows().map(smooth_integrand).sum::<f64>() / batch.n() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let nf = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic against the uniform CDF.
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let hi = (i as f64 + 1.0) / n - x;
            let lo = x - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
