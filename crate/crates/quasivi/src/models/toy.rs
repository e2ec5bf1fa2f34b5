//! Factorizing standard normal target.

use crate::families::{FamilySpec, VarParams};

/// `log p(z) = -||z||^2 / 2 - (d/2) log 2pi`, no data.
///
/// With a diagonal Gaussian family the negative-ELBO gap is available in
/// closed form, which makes this the reference target for convergence-rate
/// experiments: the gap is `KL(q || p)`, and with unit scales it reduces to
/// `||m||^2 / 2`.
#[derive(Debug, Clone)]
pub struct ToyGaussian {
    dim: usize,
}

impl ToyGaussian {
    pub fn new(dim: usize) -> Self {
        ToyGaussian { dim }
    }

    pub fn latent_dim(&self) -> usize {
        self.dim
    }

    pub fn log_joint(&self, z: &[f64]) -> f64 {
        let ss: f64 = z.iter().map(|v| v * v).sum();
        -0.5 * ss - 0.5 * self.dim as f64 * crate::families::LOG_2PI
    }

    pub fn grad_z(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|v| -v).collect()
    }

    pub fn default_family(&self) -> FamilySpec {
        FamilySpec::diag_gaussian(self.dim)
    }

    /// Exact optimality gap `F(lambda) - F*` for a diagonal Gaussian family:
    /// `KL(N(m, sigma^2) || N(0, I)) = sum (sigma_j^2 + m_j^2 - 1 - 2 rho_j) / 2`.
    pub fn exact_gap(&self, spec: &FamilySpec, params: &VarParams) -> f64 {
        debug_assert_eq!(spec.latent_dim(), self.dim);
        let v = params.values();
        let mut gap = 0.0;
        // single Gaussian block layout: means then log-scales
        for j in 0..self.dim {
            let m = v[j];
            let rho = v[self.dim + j];
            let s2 = (2.0 * rho).exp();
            gap += 0.5 * (s2 + m * m - 1.0 - 2.0 * rho);
        }
        gap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_joint_at_origin() {
        let m = ToyGaussian::new(2);
        assert!((m.log_joint(&[0.0, 0.0]) - (-crate::families::LOG_2PI)).abs() < 1e-15);
    }

    #[test]
    fn gradient_is_negated_position() {
        let m = ToyGaussian::new(2);
        assert_eq!(m.grad_z(&[1.0, -1.0]), vec![-1.0, 1.0]);
    }

    #[test]
    fn gap_at_small_mean_offset() {
        let m = ToyGaussian::new(2);
        let spec = m.default_family();
        let params = spec.init_params(0.1, 0.0);
        assert!((m.exact_gap(&spec, &params) - 0.01).abs() < 1e-15);
    }
}
