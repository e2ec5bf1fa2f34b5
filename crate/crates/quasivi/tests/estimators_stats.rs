//! Estimator-level statistical oracles: unbiasedness against the analytic
//! gradient, agreement between the score and reparameterization forms,
//! finite differences of the empirical objective, and variance behavior.

use quasivi::diagnostics::grad_variance;
use quasivi::estimators::{elbo, Estimator, EstimatorKind};
use quasivi::lds::{generate, SequenceSource, SourceKind};
use quasivi::models::{hierarchical_lr, toy_gaussian};

/// Mean and standard error of each gradient coordinate over fresh
/// randomization seeds.
fn replicate_gradient(
    kind: EstimatorKind,
    seeds: u64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let model = toy_gaussian(2).unwrap();
    let spec = model.default_family();
    let params = spec.init_params(0.1, 0.0);
    let estimator = Estimator::new(kind).with_frozen_scales(true);
    let dim = spec.param_dim();
    let mut sums = vec![0.0; dim];
    let mut sumsq = vec![0.0; dim];
    for s in 0..seeds {
        let src = SequenceSource::new(SourceKind::RqmcScramble, 2).with_seed(7000 + s);
        let batch = generate(&src, n).unwrap();
        let est = estimator.estimate(&model, &spec, &params, &batch, src).unwrap();
        for i in 0..dim {
            sums[i] += est.grad[i];
            sumsq[i] += est.grad[i] * est.grad[i];
        }
    }
    let sf = seeds as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / sf).collect();
    let ses: Vec<f64> = (0..dim)
        .map(|i| {
            let var = (sumsq[i] - sf * means[i] * means[i]) / (sf - 1.0);
            (var / sf).sqrt()
        })
        .collect();
    (means, ses)
}

#[test]
fn both_estimators_are_unbiased_for_the_analytic_gradient() {
    // ELBO ascent gradient in the means at sigma = 1 is -m = (-0.1, -0.1).
    for kind in [EstimatorKind::Score, EstimatorKind::Reparam] {
        let (means, ses) = replicate_gradient(kind, 200, 10);
        for j in 0..2 {
            assert!(
                (means[j] + 0.1).abs() <= 3.0 * ses[j],
                "{kind:?} coord {j}: mean {} se {}",
                means[j],
                ses[j]
            );
        }
    }
}

#[test]
fn score_and_reparam_agree_within_joint_error() {
    let (m_score, se_score) = replicate_gradient(EstimatorKind::Score, 200, 10);
    let (m_rep, se_rep) = replicate_gradient(EstimatorKind::Reparam, 200, 10);
    for j in 0..2 {
        let joint = (se_score[j] * se_score[j] + se_rep[j] * se_rep[j]).sqrt();
        assert!(
            (m_score[j] - m_rep[j]).abs() <= 3.0 * joint,
            "coord {j}: {} vs {}",
            m_score[j],
            m_rep[j]
        );
    }
}

#[test]
fn reparam_matches_finite_differences_of_the_empirical_elbo() {
    // With common random numbers the reparameterization gradient is the
    // exact derivative of the empirical ELBO; at N = 10^6 the comparison
    // against central differences is tight.
    let model = toy_gaussian(2).unwrap();
    let spec = model.default_family();
    let params = spec.init_params(0.1, 0.0);
    let src = SequenceSource::new(SourceKind::Mc, 2).with_seed(404);
    let batch = generate(&src, 1_000_000).unwrap();
    let est = Estimator::new(EstimatorKind::Reparam)
        .estimate(&model, &spec, &params, &batch, src)
        .unwrap();

    let h = 1e-4;
    for i in 0..spec.param_dim() {
        let mut up = params.clone();
        up.values_mut()[i] += h;
        let mut dn = params.clone();
        dn.values_mut()[i] -= h;
        let fd = (elbo(&model, &spec, &up, &batch).unwrap()
            - elbo(&model, &spec, &dn, &batch).unwrap())
            / (2.0 * h);
        let denom = est.grad[i].abs().max(fd.abs()).max(0.05);
        assert!(
            (est.grad[i] - fd).abs() / denom <= 0.02,
            "coord {i}: grad {} vs fd {}",
            est.grad[i],
            fd
        );
    }
}

#[test]
fn elbo_estimate_tracks_the_analytic_gap() {
    // At m = (0.1, 0.1), sigma = 1 the exact ELBO is -||m||^2/2 = -0.01.
    let model = toy_gaussian(2).unwrap();
    let spec = model.default_family();
    let params = spec.init_params(0.1, 0.0);
    let src = SequenceSource::new(SourceKind::Mc, 2).with_seed(777);
    let batch = generate(&src, 10_000).unwrap();
    let value = elbo(&model, &spec, &params, &batch).unwrap();
    // var of the per-sample integrand is small; 3 SE with a generous bound
    assert!((value + 0.01).abs() < 0.01, "elbo {value}");
}

#[test]
fn score_variance_dominates_reparam_variance() {
    // Ordering check along the optimization path: after a short warmup the
    // score-function estimator is far noisier than the pathwise one.
    let model = hierarchical_lr(3, 2, 55).unwrap();
    let spec = model.default_family();
    let init = spec.init_params(0.0, 0.0);
    let cfg = quasivi::optim::RunConfig {
        estimator: Estimator::new(EstimatorKind::Reparam),
        source: SourceKind::RqmcScramble,
        optim: quasivi::optim::OptimConfig::adam(0.1, 150),
        schedule: quasivi::optim::SampleSchedule::Fixed(10),
        master_seed: 55,
        snapshot_every: 0,
        skip: 0,
    };
    let params = quasivi::optim::run(&model, &spec, &init, &cfg)
        .unwrap()
        .final_params;

    let score = grad_variance(
        &model,
        &spec,
        &params,
        &Estimator::new(EstimatorKind::Score),
        SourceKind::Mc,
        10,
        400,
        9,
    )
    .unwrap();
    let reparam = grad_variance(
        &model,
        &spec,
        &params,
        &Estimator::new(EstimatorKind::Reparam),
        SourceKind::Mc,
        10,
        400,
        9,
    )
    .unwrap();
    assert!(
        score.trace_of_variance > 5.0 * reparam.trace_of_variance,
        "score {} vs reparam {}",
        score.trace_of_variance,
        reparam.trace_of_variance
    );
}

#[test]
fn mc_gradient_variance_matches_closed_form() {
    // Fixed-scale toy: each mean coordinate of the estimator is
    // -m - mean(eps), so tr Var = d/N exactly in expectation.
    let model = toy_gaussian(2).unwrap();
    let spec = model.default_family();
    let params = spec.init_params(0.1, 0.0);
    let rep = grad_variance(
        &model,
        &spec,
        &params,
        &Estimator::new(EstimatorKind::Reparam).with_frozen_scales(true),
        SourceKind::Mc,
        10,
        10_000,
        2718,
    )
    .unwrap();
    let expected = 2.0 / 10.0;
    assert!(
        (rep.trace_of_variance - expected).abs() < 0.05 * expected,
        "trace {} vs {}",
        rep.trace_of_variance,
        expected
    );
}
