//! Hierarchical linear regression with simulated data.
//!
//! Generative process:
//!
//! ```text
//! mu_b    ~ N(0, 10^2)            (k-vector, coefficient hyper prior)
//! sigma_b ~ LogNormal(0, 0.5)     (coefficient scale)
//! eps     ~ LogNormal(0, 0.5)     (observation noise scale)
//! b_i     ~ N(mu_b, sigma_b^2 I)  (per-group coefficients, i = 1..I)
//! y_i     ~ N(x_i' b_i, eps^2)
//! ```
//!
//! Latent layout: `z = (mu_b [k], sigma_b, eps, b_11 .. b_Ik)`, giving
//! `d_z = I*k + k + 2`. The scale latents live in their natural positive
//! parameterization; the matching family covers them with lognormal blocks.

use super::{log_lognormal_pdf, log_normal_pdf};
use crate::families::{FamilyBlock, FamilyBlockKind, FamilySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const HYPER_MEAN_SD: f64 = 10.0;
const HYPER_SCALE_SIGMA: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct HierLinReg {
    groups: usize,
    covariates: usize,
    /// Row-major `groups x covariates` design matrix (one row per group).
    x: Vec<f64>,
    y: Vec<f64>,
}

impl HierLinReg {
    /// Simulates covariates and responses from the generative process.
    pub fn simulate(groups: usize, covariates: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = covariates;
        let mut normal = || -> f64 { rng.sample(StandardNormal) };

        let mu_b: Vec<f64> = (0..k).map(|_| HYPER_MEAN_SD * normal()).collect();
        let sigma_b = (HYPER_SCALE_SIGMA * normal()).exp();
        let eps = (HYPER_SCALE_SIGMA * normal()).exp();

        let mut x = Vec::with_capacity(groups * k);
        let mut y = Vec::with_capacity(groups);
        for _ in 0..groups {
            let b_i: Vec<f64> = mu_b.iter().map(|m| m + sigma_b * normal()).collect();
            let xi: Vec<f64> = (0..k).map(|_| normal()).collect();
            let mean: f64 = xi.iter().zip(&b_i).map(|(a, b)| a * b).sum();
            y.push(mean + eps * normal());
            x.extend(xi);
        }
        HierLinReg {
            groups,
            covariates,
            x,
            y,
        }
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn covariates(&self) -> usize {
        self.covariates
    }

    pub fn latent_dim(&self) -> usize {
        self.groups * self.covariates + self.covariates + 2
    }

    fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], f64, f64, &'a [f64]) {
        let k = self.covariates;
        (&z[..k], z[k], z[k + 1], &z[k + 2..])
    }

    pub fn in_support(&self, z: &[f64]) -> bool {
        let k = self.covariates;
        z[k] > 0.0 && z[k + 1] > 0.0
    }

    pub fn log_joint(&self, z: &[f64]) -> f64 {
        let (mu_b, sigma_b, eps, b) = self.split(z);
        if sigma_b <= 0.0 || eps <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = self.covariates;
        let mut lp = 0.0;
        for &m in mu_b {
            lp += log_normal_pdf(m, 0.0, HYPER_MEAN_SD);
        }
        lp += log_lognormal_pdf(sigma_b, 0.0, HYPER_SCALE_SIGMA);
        lp += log_lognormal_pdf(eps, 0.0, HYPER_SCALE_SIGMA);
        for i in 0..self.groups {
            let bi = &b[i * k..(i + 1) * k];
            let xi = &self.x[i * k..(i + 1) * k];
            for j in 0..k {
                lp += log_normal_pdf(bi[j], mu_b[j], sigma_b);
            }
            let mean: f64 = xi.iter().zip(bi).map(|(a, c)| a * c).sum();
            lp += log_normal_pdf(self.y[i], mean, eps);
        }
        lp
    }

    pub fn grad_z(&self, z: &[f64]) -> Vec<f64> {
        let (mu_b, sigma_b, eps, b) = self.split(z);
        let k = self.covariates;
        let sb2 = sigma_b * sigma_b;
        let e2 = eps * eps;
        let mut grad = vec![0.0; self.latent_dim()];

        // lognormal hyper prior pulls on the scales
        grad[k] = -(1.0 + sigma_b.ln() / (HYPER_SCALE_SIGMA * HYPER_SCALE_SIGMA)) / sigma_b;
        grad[k + 1] = -(1.0 + eps.ln() / (HYPER_SCALE_SIGMA * HYPER_SCALE_SIGMA)) / eps;

        for j in 0..k {
            grad[j] = -mu_b[j] / (HYPER_MEAN_SD * HYPER_MEAN_SD);
        }

        for i in 0..self.groups {
            let bi = &b[i * k..(i + 1) * k];
            let xi = &self.x[i * k..(i + 1) * k];
            let resid = self.y[i] - xi.iter().zip(bi).map(|(a, c)| a * c).sum::<f64>();
            for j in 0..k {
                let dev = bi[j] - mu_b[j];
                grad[j] += dev / sb2;
                grad[k] += -1.0 / sigma_b + dev * dev / (sb2 * sigma_b);
                grad[k + 2 + i * k + j] = -dev / sb2 + xi[j] * resid / e2;
            }
            grad[k + 1] += -1.0 / eps + resid * resid / (e2 * eps);
        }
        grad
    }

    pub fn default_family(&self) -> FamilySpec {
        FamilySpec::new(vec![
            FamilyBlock {
                kind: FamilyBlockKind::DiagGaussian,
                dim: self.covariates,
            },
            FamilyBlock {
                kind: FamilyBlockKind::DiagLognormal,
                dim: 2,
            },
            FamilyBlock {
                kind: FamilyBlockKind::DiagGaussian,
                dim: self.groups * self.covariates,
            },
        ])
    }
}
