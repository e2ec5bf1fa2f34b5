//! Multi-level Poisson generalized linear model with synthetic data.
//!
//! Generative process over `E` ethnicity groups and `P` precincts:
//!
//! ```text
//! mu                        ~ N(0, 10^2)
//! log sa2, log sb2          ~ N(0, 10^2)
//! alpha_e                   ~ N(0, sa2)
//! beta_p                    ~ N(0, sb2)
//! log lambda_ep = mu + alpha_e + beta_p + log N_ep
//! Y_ep                      ~ Poisson(lambda_ep)
//! ```
//!
//! Latent layout: `z = (mu, log sa2, log sb2, alpha_1..E, beta_1..P)`,
//! `d_z = 3 + E + P`; the log-variances are latent coordinates directly, so
//! the whole posterior is unconstrained and a diagonal Gaussian family
//! covers it. Exposures `N_ep` are drawn log-uniformly in `[10^2, 10^4]`;
//! counts come from ground-truth effects of moderate size so the simulated
//! rates stay within floating-point range.

use super::log_normal_pdf;
use crate::families::FamilySpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use statrs::function::gamma::ln_gamma;

const HYPER_SD: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct MultilevelPoisson {
    e_groups: usize,
    precincts: usize,
    /// `E x P` exposures, row major.
    exposures: Vec<f64>,
    log_exposures: Vec<f64>,
    counts: Vec<f64>,
    /// `ln(Y_ep!)` per cell, precomputed.
    ln_count_factorials: Vec<f64>,
}

impl MultilevelPoisson {
    pub fn simulate(e_groups: usize, precincts: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = e_groups * precincts;

        // Ground-truth effects kept at realistic magnitudes; the model's
        // wide hyperpriors stay in the log joint below.
        let mu: f64 = -2.5 + 0.5 * rng.sample::<f64, _>(StandardNormal);
        let s_alpha: f64 = rng.gen_range(0.3..0.7);
        let s_beta: f64 = rng.gen_range(0.2..0.5);
        let alphas: Vec<f64> = (0..e_groups)
            .map(|_| s_alpha * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let betas: Vec<f64> = (0..precincts)
            .map(|_| s_beta * rng.sample::<f64, _>(StandardNormal))
            .collect();

        let mut exposures = Vec::with_capacity(cells);
        let mut counts = Vec::with_capacity(cells);
        for e in 0..e_groups {
            for p in 0..precincts {
                let log_n = rng.gen_range(2.0_f64..4.0) * std::f64::consts::LN_10;
                let n_ep = log_n.exp().floor().max(100.0);
                let lambda = (mu + alphas[e] + betas[p] + n_ep.ln()).exp();
                let y = Poisson::new(lambda.max(1e-12)).unwrap().sample(&mut rng);
                exposures.push(n_ep);
                counts.push(y);
            }
        }
        let log_exposures = exposures.iter().map(|&n| n.ln()).collect();
        let ln_count_factorials = counts.iter().map(|&y| ln_gamma(y + 1.0)).collect();
        MultilevelPoisson {
            e_groups,
            precincts,
            exposures,
            log_exposures,
            counts,
            ln_count_factorials,
        }
    }

    pub fn e_groups(&self) -> usize {
        self.e_groups
    }

    pub fn precincts(&self) -> usize {
        self.precincts
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn exposures(&self) -> &[f64] {
        &self.exposures
    }

    pub fn latent_dim(&self) -> usize {
        3 + self.e_groups + self.precincts
    }

    pub fn log_joint(&self, z: &[f64]) -> f64 {
        let (mu, lsa2, lsb2) = (z[0], z[1], z[2]);
        let alphas = &z[3..3 + self.e_groups];
        let betas = &z[3 + self.e_groups..];
        let sa = (0.5 * lsa2).exp();
        let sb = (0.5 * lsb2).exp();

        let mut lp = log_normal_pdf(mu, 0.0, HYPER_SD)
            + log_normal_pdf(lsa2, 0.0, HYPER_SD)
            + log_normal_pdf(lsb2, 0.0, HYPER_SD);
        for &a in alphas {
            lp += log_normal_pdf(a, 0.0, sa);
        }
        for &b in betas {
            lp += log_normal_pdf(b, 0.0, sb);
        }
        for e in 0..self.e_groups {
            for p in 0..self.precincts {
                let c = e * self.precincts + p;
                let log_rate = mu + alphas[e] + betas[p] + self.log_exposures[c];
                lp += self.counts[c] * log_rate - log_rate.exp() - self.ln_count_factorials[c];
            }
        }
        lp
    }

    pub fn grad_z(&self, z: &[f64]) -> Vec<f64> {
        let (mu, lsa2, lsb2) = (z[0], z[1], z[2]);
        let alphas = &z[3..3 + self.e_groups];
        let betas = &z[3 + self.e_groups..];
        let va = lsa2.exp();
        let vb = lsb2.exp();

        let mut grad = vec![0.0; self.latent_dim()];
        grad[0] = -mu / (HYPER_SD * HYPER_SD);
        grad[1] = -lsa2 / (HYPER_SD * HYPER_SD);
        grad[2] = -lsb2 / (HYPER_SD * HYPER_SD);

        for (e, &a) in alphas.iter().enumerate() {
            grad[1] += -0.5 + a * a / (2.0 * va);
            grad[3 + e] = -a / va;
        }
        for (p, &b) in betas.iter().enumerate() {
            grad[2] += -0.5 + b * b / (2.0 * vb);
            grad[3 + self.e_groups + p] = -b / vb;
        }

        for e in 0..self.e_groups {
            for p in 0..self.precincts {
                let c = e * self.precincts + p;
                let log_rate = mu + alphas[e] + betas[p] + self.log_exposures[c];
                let pull = self.counts[c] - log_rate.exp();
                grad[0] += pull;
                grad[3 + e] += pull;
                grad[3 + self.e_groups + p] += pull;
            }
        }
        grad
    }

    pub fn default_family(&self) -> FamilySpec {
        FamilySpec::diag_gaussian(self.latent_dim())
    }
}
