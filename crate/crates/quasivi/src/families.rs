//! Mean-field variational families.
//!
//! A family is an ordered list of blocks, each either diagonal Gaussian or
//! diagonal lognormal over a span of latent coordinates. Parameters are
//! unconstrained: per block, all means `m` come first, then all log-scales
//! `rho` with scale `sigma = exp(rho)`, so a family over `d_z` latents has
//! `2 * d_z` parameters.

use crate::transforms::{BlockDist, TransformSpec};
use crate::{Error, Result};

pub const LOG_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyBlockKind {
    DiagGaussian,
    DiagLognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyBlock {
    pub kind: FamilyBlockKind,
    pub dim: usize,
}

/// Block layout of a mean-field family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    blocks: Vec<FamilyBlock>,
    latent_dim: usize,
}

impl FamilySpec {
    pub fn new(blocks: Vec<FamilyBlock>) -> Self {
        let latent_dim = blocks.iter().map(|b| b.dim).sum();
        FamilySpec { blocks, latent_dim }
    }

    /// A single diagonal Gaussian block over `d` latents.
    pub fn diag_gaussian(d: usize) -> Self {
        Self::new(vec![FamilyBlock {
            kind: FamilyBlockKind::DiagGaussian,
            dim: d,
        }])
    }

    pub fn blocks(&self) -> &[FamilyBlock] {
        &self.blocks
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn param_dim(&self) -> usize {
        2 * self.latent_dim
    }

    /// Iterates blocks as `(latent offset, parameter offset, block)`;
    /// within a block the means sit at `param_offset..param_offset + dim`
    /// and the log-scales right after.
    fn layout(&self) -> impl Iterator<Item = (usize, usize, FamilyBlock)> + '_ {
        let mut z_off = 0;
        let mut p_off = 0;
        self.blocks.iter().map(move |&b| {
            let item = (z_off, p_off, b);
            z_off += b.dim;
            p_off += 2 * b.dim;
            item
        })
    }

    /// Parameters with all means set to `mean0` and all log-scales to `rho0`.
    pub fn init_params(&self, mean0: f64, rho0: f64) -> VarParams {
        let mut values = vec![0.0; self.param_dim()];
        for (_, p_off, b) in self.layout() {
            for j in 0..b.dim {
                values[p_off + j] = mean0;
                values[p_off + b.dim + j] = rho0;
            }
        }
        VarParams { values }
    }

    /// The equivalent transform pipeline at fixed parameters, used to draw
    /// from the family through `transforms::apply`.
    pub fn transform_spec(&self, params: &VarParams) -> Result<TransformSpec> {
        self.check(params)?;
        let mut blocks = Vec::new();
        for (_, p_off, b) in self.layout() {
            let means = &params.values[p_off..p_off + b.dim];
            let rhos = &params.values[p_off + b.dim..p_off + 2 * b.dim];
            match b.kind {
                FamilyBlockKind::DiagGaussian => {
                    let chol: Vec<Vec<f64>> = (0..b.dim)
                        .map(|i| {
                            let mut row = vec![0.0; b.dim];
                            row[i] = rhos[i].exp();
                            row
                        })
                        .collect();
                    blocks.push(BlockDist::MultivariateNormal {
                        mean: means.to_vec(),
                        chol,
                    });
                }
                FamilyBlockKind::DiagLognormal => {
                    for j in 0..b.dim {
                        blocks.push(BlockDist::Lognormal {
                            mu: means[j],
                            sigma: rhos[j].exp(),
                        });
                    }
                }
            }
        }
        TransformSpec::new(blocks)
    }

    fn check(&self, params: &VarParams) -> Result<()> {
        if params.values.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                got: params.values.len(),
            });
        }
        Ok(())
    }
}

/// Unconstrained variational parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VarParams {
    values: Vec<f64>,
}

impl VarParams {
    pub fn new(values: Vec<f64>) -> Self {
        VarParams { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Log-density of the mean-field product at `z`.
///
/// Returns `-inf` when `z` leaves the support (non-positive coordinate in a
/// lognormal block); [`in_support`] distinguishes that case explicitly.
pub fn log_q(spec: &FamilySpec, params: &VarParams, z: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), spec.latent_dim());
    debug_assert_eq!(params.len(), spec.param_dim());
    let mut total = 0.0;
    for (z_off, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let rho = params.values[p_off + b.dim + j];
            let zi = z[z_off + j];
            match b.kind {
                FamilyBlockKind::DiagGaussian => {
                    let t = (zi - m) / rho.exp();
                    total += -0.5 * LOG_2PI - rho - 0.5 * t * t;
                }
                FamilyBlockKind::DiagLognormal => {
                    if zi <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    let lz = zi.ln();
                    let t = (lz - m) / rho.exp();
                    total += -0.5 * LOG_2PI - rho - lz - 0.5 * t * t;
                }
            }
        }
    }
    total
}

/// Whether `z` lies in the family's support.
pub fn in_support(spec: &FamilySpec, z: &[f64]) -> bool {
    spec.layout().all(|(z_off, _, b)| {
        b.kind != FamilyBlockKind::DiagLognormal || z[z_off..z_off + b.dim].iter().all(|&v| v > 0.0)
    })
}

/// Gradient of `log_q` in the parameters at fixed `z`.
pub fn score(spec: &FamilySpec, params: &VarParams, z: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; spec.param_dim()];
    for (z_off, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let rho = params.values[p_off + b.dim + j];
            let zi = z[z_off + j];
            let y = match b.kind {
                FamilyBlockKind::DiagGaussian => zi,
                FamilyBlockKind::DiagLognormal => {
                    if zi <= 0.0 {
                        grad[p_off + j] = f64::NAN;
                        grad[p_off + b.dim + j] = f64::NAN;
                        continue;
                    }
                    zi.ln()
                }
            };
            let var = (2.0 * rho).exp();
            grad[p_off + j] = (y - m) / var;
            grad[p_off + b.dim + j] = (y - m) * (y - m) / var - 1.0;
        }
    }
    grad
}

/// Gradient of `log_q` in `z` at fixed parameters.
pub fn grad_z_log_q(spec: &FamilySpec, params: &VarParams, z: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; spec.latent_dim()];
    for (z_off, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let rho = params.values[p_off + b.dim + j];
            let zi = z[z_off + j];
            let var = (2.0 * rho).exp();
            grad[z_off + j] = match b.kind {
                FamilyBlockKind::DiagGaussian => -(zi - m) / var,
                FamilyBlockKind::DiagLognormal => {
                    let lz = zi.ln();
                    (-1.0 - (lz - m) / var) / zi
                }
            };
        }
    }
    grad
}

/// The reparameterization map `g(eps)`: Gaussian blocks `m + sigma * eps`,
/// lognormal blocks `exp(m + sigma * eps)`.
pub fn reparam(spec: &FamilySpec, params: &VarParams, eps: &[f64]) -> Vec<f64> {
    debug_assert_eq!(eps.len(), spec.latent_dim());
    let mut z = vec![0.0; spec.latent_dim()];
    for (z_off, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let sigma = params.values[p_off + b.dim + j].exp();
            let linear = m + sigma * eps[z_off + j];
            z[z_off + j] = match b.kind {
                FamilyBlockKind::DiagGaussian => linear,
                FamilyBlockKind::DiagLognormal => linear.exp(),
            };
        }
    }
    z
}

/// Pulls a cotangent over `z` back through the reparameterization map,
/// returning `cotangent^T (dg/dlambda)`.
pub fn reparam_vjp(
    spec: &FamilySpec,
    params: &VarParams,
    eps: &[f64],
    cotangent: &[f64],
) -> Vec<f64> {
    debug_assert_eq!(cotangent.len(), spec.latent_dim());
    let mut grad = vec![0.0; spec.param_dim()];
    for (z_off, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let sigma = params.values[p_off + b.dim + j].exp();
            let e = eps[z_off + j];
            let c = cotangent[z_off + j];
            match b.kind {
                FamilyBlockKind::DiagGaussian => {
                    grad[p_off + j] = c;
                    grad[p_off + b.dim + j] = c * sigma * e;
                }
                FamilyBlockKind::DiagLognormal => {
                    let z = (m + sigma * e).exp();
                    grad[p_off + j] = c * z;
                    grad[p_off + b.dim + j] = c * z * sigma * e;
                }
            }
        }
    }
    grad
}

/// Gradient of the analytic entropy of the family.
///
/// Gaussian coordinates contribute `d/drho = 1`; lognormal coordinates
/// additionally `d/dm = 1` (their entropy is `m + rho + const`).
pub fn entropy_grad(spec: &FamilySpec, _params: &VarParams) -> Vec<f64> {
    let mut grad = vec![0.0; spec.param_dim()];
    for (_, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            if b.kind == FamilyBlockKind::DiagLognormal {
                grad[p_off + j] = 1.0;
            }
            grad[p_off + b.dim + j] = 1.0;
        }
    }
    grad
}

/// Analytic entropy of the family (all constants included).
pub fn entropy(spec: &FamilySpec, params: &VarParams) -> f64 {
    let mut h = 0.0;
    for (_, p_off, b) in spec.layout() {
        for j in 0..b.dim {
            let m = params.values[p_off + j];
            let rho = params.values[p_off + b.dim + j];
            h += 0.5 * (LOG_2PI + 1.0) + rho;
            if b.kind == FamilyBlockKind::DiagLognormal {
                h += m;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian1() -> (FamilySpec, VarParams) {
        let spec = FamilySpec::diag_gaussian(1);
        let params = spec.init_params(0.0, 0.0);
        (spec, params)
    }

    #[test]
    fn gaussian_mode_density() {
        let (spec, params) = gaussian1();
        let lq = log_q(&spec, &params, &[0.0]);
        assert!((lq - (-0.918_938_533_204_672_7)).abs() < 1e-12);
    }

    #[test]
    fn lognormal_density_at_one() {
        let spec = FamilySpec::new(vec![FamilyBlock {
            kind: FamilyBlockKind::DiagLognormal,
            dim: 1,
        }]);
        let params = spec.init_params(0.0, 0.0);
        // log z = 0 kills both the quadratic and the -log z term.
        let lq = log_q(&spec, &params, &[1.0]);
        assert!((lq - (-0.918_938_533_204_672_7)).abs() < 1e-12);
    }

    #[test]
    fn lognormal_support_violation() {
        let spec = FamilySpec::new(vec![FamilyBlock {
            kind: FamilyBlockKind::DiagLognormal,
            dim: 1,
        }]);
        let params = spec.init_params(0.0, 0.0);
        assert_eq!(log_q(&spec, &params, &[-1.0]), f64::NEG_INFINITY);
        assert!(!in_support(&spec, &[-1.0]));
        assert!(in_support(&spec, &[0.5]));
    }

    #[test]
    fn score_at_the_mean() {
        let (spec, params) = gaussian1();
        let g = score(&spec, &params, &[0.0]);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], -1.0);
    }

    #[test]
    fn reparam_at_zero_noise() {
        let spec = FamilySpec::new(vec![
            FamilyBlock {
                kind: FamilyBlockKind::DiagGaussian,
                dim: 1,
            },
            FamilyBlock {
                kind: FamilyBlockKind::DiagLognormal,
                dim: 1,
            },
        ]);
        let mut params = spec.init_params(0.0, 0.0);
        params.values_mut()[0] = 1.5; // gaussian mean
        params.values_mut()[2] = 0.7; // lognormal location
        let z = reparam(&spec, &params, &[0.0, 0.0]);
        assert_eq!(z[0], 1.5);
        assert!((z[1] - 0.7f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn doubling_sigma_doubles_offsets() {
        let spec = FamilySpec::diag_gaussian(1);
        let mut params = spec.init_params(0.3, 0.0);
        let z1 = reparam(&spec, &params, &[0.8])[0];
        params.values_mut()[1] = std::f64::consts::LN_2; // sigma = 2
        let z2 = reparam(&spec, &params, &[0.8])[0];
        assert!(((z2 - 0.3) - 2.0 * (z1 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn vjp_zero_cotangent_and_zero_noise() {
        let spec = FamilySpec::diag_gaussian(2);
        let params = spec.init_params(0.1, 0.2);
        let g = reparam_vjp(&spec, &params, &[0.4, -0.3], &[0.0, 0.0]);
        assert!(g.iter().all(|&v| v == 0.0));
        let g = reparam_vjp(&spec, &params, &[0.0, 0.0], &[1.0, 1.0]);
        // scale has no first-order effect at the mean
        assert_eq!(&g[2..], &[0.0, 0.0]);
    }

    #[test]
    fn entropy_grad_layout() {
        let spec = FamilySpec::new(vec![
            FamilyBlock {
                kind: FamilyBlockKind::DiagGaussian,
                dim: 2,
            },
            FamilyBlock {
                kind: FamilyBlockKind::DiagLognormal,
                dim: 1,
            },
        ]);
        let params = spec.init_params(0.0, 0.0);
        let g = entropy_grad(&spec, &params);
        assert_eq!(g, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn entropy_matches_finite_differences_of_itself() {
        // d entropy / d rho == 1 and, for lognormal blocks, d/dm == 1.
        let spec = FamilySpec::new(vec![FamilyBlock {
            kind: FamilyBlockKind::DiagLognormal,
            dim: 1,
        }]);
        let params = spec.init_params(0.4, -0.3);
        let h = 1e-6;
        for idx in 0..2 {
            let mut up = params.clone();
            up.values_mut()[idx] += h;
            let mut dn = params.clone();
            dn.values_mut()[idx] -= h;
            let fd = (entropy(&spec, &up) - entropy(&spec, &dn)) / (2.0 * h);
            assert!((fd - 1.0).abs() < 1e-8);
        }
    }
}
