//! Built-in Bayesian targets.
//!
//! Each model exposes the full log joint `log p(x, z)` (all normalizing
//! constants included, so ELBO values are comparable across estimators and
//! sequence kinds) together with its analytic gradient in `z`, a synthetic
//! data generator keyed by seed, and the mean-field family matching its
//! latent layout.

mod hier_lr;
mod poisson;
mod toy;

pub use hier_lr::HierLinReg;
pub use poisson::MultilevelPoisson;
pub use toy::ToyGaussian;

use crate::families::FamilySpec;
use crate::{Error, Result};

/// A concrete model instance: data, hyperparameters and latent layout.
#[derive(Debug, Clone)]
pub enum ModelInstance {
    Toy(ToyGaussian),
    HierLinReg(HierLinReg),
    MultilevelPoisson(MultilevelPoisson),
}

impl ModelInstance {
    pub fn name(&self) -> &'static str {
        match self {
            ModelInstance::Toy(_) => "toy",
            ModelInstance::HierLinReg(_) => "hier-lr",
            ModelInstance::MultilevelPoisson(_) => "multilevel-poisson",
        }
    }

    /// Latent dimension `d_z`.
    pub fn latent_dim(&self) -> usize {
        match self {
            ModelInstance::Toy(m) => m.latent_dim(),
            ModelInstance::HierLinReg(m) => m.latent_dim(),
            ModelInstance::MultilevelPoisson(m) => m.latent_dim(),
        }
    }

    /// Log joint density; `-inf` when `z` violates a positivity constraint.
    pub fn log_joint(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.latent_dim());
        match self {
            ModelInstance::Toy(m) => m.log_joint(z),
            ModelInstance::HierLinReg(m) => m.log_joint(z),
            ModelInstance::MultilevelPoisson(m) => m.log_joint(z),
        }
    }

    /// Analytic gradient of the log joint in `z`.
    pub fn grad_z(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.latent_dim());
        match self {
            ModelInstance::Toy(m) => m.grad_z(z),
            ModelInstance::HierLinReg(m) => m.grad_z(z),
            ModelInstance::MultilevelPoisson(m) => m.grad_z(z),
        }
    }

    pub fn in_support(&self, z: &[f64]) -> bool {
        match self {
            ModelInstance::HierLinReg(m) => m.in_support(z),
            _ => true,
        }
    }

    /// The mean-field family whose blocks mirror the model's priors.
    pub fn default_family(&self) -> FamilySpec {
        match self {
            ModelInstance::Toy(m) => m.default_family(),
            ModelInstance::HierLinReg(m) => m.default_family(),
            ModelInstance::MultilevelPoisson(m) => m.default_family(),
        }
    }
}

/// Factorizing standard normal target of dimension `d`.
pub fn toy_gaussian(d: usize) -> Result<ModelInstance> {
    if d == 0 {
        return Err(Error::InvalidConfig("toy dimension must be >= 1".into()));
    }
    Ok(ModelInstance::Toy(ToyGaussian::new(d)))
}

/// Hierarchical linear regression with `groups` group-level coefficient
/// vectors of dimension `covariates`, simulated from its own prior.
pub fn hierarchical_lr(groups: usize, covariates: usize, seed: u64) -> Result<ModelInstance> {
    if groups == 0 || covariates == 0 {
        return Err(Error::InvalidConfig(
            "hier-lr needs groups >= 1 and covariates >= 1".into(),
        ));
    }
    Ok(ModelInstance::HierLinReg(HierLinReg::simulate(
        groups, covariates, seed,
    )))
}

/// Multi-level Poisson GLM over `ethnic_groups x precincts` cells with
/// synthetic exposures and counts.
pub fn multilevel_poisson(ethnic_groups: usize, precincts: usize, seed: u64) -> Result<ModelInstance> {
    if ethnic_groups == 0 || precincts == 0 {
        return Err(Error::InvalidConfig(
            "multilevel-poisson needs at least one group and one precinct".into(),
        ));
    }
    Ok(ModelInstance::MultilevelPoisson(MultilevelPoisson::simulate(
        ethnic_groups,
        precincts,
        seed,
    )))
}

/// Gaussian log-density with standard deviation `sd`, constants included.
pub(crate) fn log_normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let t = (x - mean) / sd;
    -0.5 * crate::families::LOG_2PI - sd.ln() - 0.5 * t * t
}

/// Lognormal log-density with location `mu` and scale `sigma`.
pub(crate) fn log_lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let lx = x.ln();
    let t = (lx - mu) / sigma;
    -0.5 * crate::families::LOG_2PI - sigma.ln() - lx - 0.5 * t * t
}
