//! Spectral decomposition of `I - P` for reversible chains and everything
//! read off it: heat kernels, Green integrals, L2/L-infinity distances and
//! the eigentime sum.
//!
//! With `D = diag(pi)` the matrix `S = D^{1/2} P D^{-1/2}` is symmetric. If
//! `phi_i` are its orthonormal eigenvectors then `f_i = phi_i / sqrt(pi)` are
//! pi-orthonormal eigenfunctions of `P`, and
//! `H_t(x,y) = sum_i f_i(x) f_i(y) pi(y) exp(-lambda_i t)`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::Result;
use crate::linalg::{Matrix, SymmetricEigen};
use crate::math::{exp, expm1, first_time_below, ln, pairwise_sum, sqrt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// Eigenvalues of `I - P`, ascending; `lambdas[0]` is the zero eigenvalue.
    pub lambdas: Vec<f64>,
    pub gap: f64,
    pub t_rel: f64,
    sqrt_pi: Vec<f64>,
    /// Row `i` is the unit eigenvector `phi_i` of the symmetrized matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Matrix>,
}

/// `D^{1/2} (I - P) D^{-1/2}`, symmetrized to wash out rounding.
pub(crate) fn symmetrized_laplacian(p: &Matrix, sqrt_pi: &[f64], states: &[usize]) -> Matrix {
    let k = states.len();
    let mut m = Matrix::zeros(k, k);
    for (a, &x) in states.iter().enumerate() {
        for (b, &y) in states.iter().enumerate().skip(a) {
            let sxy = sqrt_pi[x] * p[(x, y)] / sqrt_pi[y];
            let syx = sqrt_pi[y] * p[(y, x)] / sqrt_pi[x];
            let s = 0.5 * (sxy + syx);
            let v = if a == b { 1.0 - s } else { -s };
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

impl SpectralData {
    /// Full decomposition with eigenvectors.
    pub fn decompose(spec: &ChainSpec) -> Result<Self> {
        Self::build(spec, true)
    }

    /// Eigenvalues only; the vector-based methods panic on the result.
    pub fn eigenvalues_only(spec: &ChainSpec) -> Result<Self> {
        Self::build(spec, false)
    }

    fn build(spec: &ChainSpec, vectors: bool) -> Result<Self> {
        spec.require_reversible()?;
        let n = spec.n();
        let sqrt_pi: Vec<f64> = spec.pi().iter().map(|&p| sqrt(p)).collect();
        let all: Vec<usize> = (0..n).collect();
        let lap = symmetrized_laplacian(spec.p(), &sqrt_pi, &all);
        let (lambdas, phi) = if vectors {
            let eig = SymmetricEigen::new(lap)?;
            let mut phi = eig.vectors.expect("eigenvectors requested");
            // f_1 is the constant function 1, so phi_1 = sqrt(pi) up to sign.
            let sign = if phi.row(0).iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            phi.row_mut(0).iter_mut().for_each(|v| *v *= sign);
            (eig.values, Some(phi))
        } else {
            (SymmetricEigen::values_only(lap)?, None)
        };
        let gap = if n > 1 { lambdas[1] } else { f64::INFINITY };
        Ok(SpectralData {
            gap,
            t_rel: 1.0 / gap,
            lambdas,
            sqrt_pi,
            phi,
        })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn has_vectors(&self) -> bool {
        self.phi.is_some()
    }

    pub fn pi(&self, x: usize) -> f64 {
        self.sqrt_pi[x] * self.sqrt_pi[x]
    }

    /// # Panics
    /// If the data was built by [`SpectralData::eigenvalues_only`].
    fn phi(&self) -> &Matrix {
        self.phi
            .as_ref()
            .expect("spectral data was computed without eigenvectors")
    }

    /// Eigenfunction `f_i(x)`.
    pub fn f(&self, i: usize, x: usize) -> f64 {
        self.phi()[(i, x)] / self.sqrt_pi[x]
    }

    /// Drops eigenvectors, e.g. before serializing a summary.
    pub fn without_vectors(mut self) -> Self {
        self.phi = None;
        self
    }

    /// `alpha = sum_{i >= 2} 1 / lambda_i`.
    pub fn eigentime_alpha(&self) -> f64 {
        let inv: Vec<f64> = self.lambdas[1..].iter().map(|&l| 1.0 / l).collect();
        pairwise_sum(&inv)
    }

    /// `sum_i phi_i(x) phi_i(y) w(lambda_i)` over `i >= from`.
    fn spectral_sum(&self, x: usize, y: usize, from: usize, w: impl Fn(f64) -> f64) -> f64 {
        let phi = self.phi();
        let terms: Vec<f64> = (from..self.n())
            .map(|i| phi[(i, x)] * phi[(i, y)] * w(self.lambdas[i]))
            .collect();
        pairwise_sum(&terms)
    }

    /// `H_t(x,y)`.
    pub fn heat(&self, x: usize, y: usize, t: f64) -> f64 {
        let r = self.sqrt_pi[y] / self.sqrt_pi[x];
        r * self.spectral_sum(x, y, 0, |l| exp(-l * t))
    }

    /// Row `H_t(x, .)`.
    pub fn heat_row(&self, x: usize, t: f64) -> Vec<f64> {
        let n = self.n();
        let phi = self.phi();
        let mut row = vec![0.0; n];
        for i in 0..n {
            let c = phi[(i, x)] * exp(-self.lambdas[i] * t);
            crate::linalg::axpy(&mut row, c, phi.row(i));
        }
        let sx = self.sqrt_pi[x];
        for (y, v) in row.iter_mut().enumerate() {
            *v *= self.sqrt_pi[y] / sx;
        }
        row
    }

    /// The full heat kernel `H_t = exp(-t (I - P))`.
    pub fn heat_kernel(&self, t: f64) -> Matrix {
        let n = self.n();
        let phi = self.phi();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            let e = exp(-self.lambdas[i] * t);
            let v = phi.row(i);
            for x in 0..n {
                let c = v[x] * e;
                if c != 0.0 {
                    crate::linalg::axpy(k.row_mut(x), c, v);
                }
            }
        }
        for x in 0..n {
            let sx = self.sqrt_pi[x];
            for (y, v) in k.row_mut(x).iter_mut().enumerate() {
                *v *= self.sqrt_pi[y] / sx;
            }
        }
        k
    }

    /// `int_0^t H_r(x,y) dr`.
    pub fn green(&self, x: usize, y: usize, t: f64) -> f64 {
        let r = self.sqrt_pi[y] / self.sqrt_pi[x];
        let head = self.pi(y) * t;
        head + r * self.spectral_sum(x, y, 1, |l| -expm1(-l * t) / l)
    }

    /// `int_s^inf (H_t(x,y)/pi(y) - 1) dt = sum_{i>=2} f_i(x) f_i(y) e^{-lambda_i s} / lambda_i`.
    pub fn tail_integral(&self, x: usize, y: usize, s: f64) -> f64 {
        let d = self.sqrt_pi[x] * self.sqrt_pi[y];
        self.spectral_sum(x, y, 1, |l| exp(-l * s) / l) / d
    }

    /// `d_{2,x}(t)^2 = sum_{i>=2} f_i(x)^2 e^{-2 lambda_i t}`.
    pub fn d2x_squared(&self, x: usize, t: f64) -> f64 {
        self.spectral_sum(x, x, 1, |l| exp(-2.0 * l * t)) / self.pi(x)
    }

    /// `d_{2,x}(t)^2` for every `x`, with one exponential per eigenvalue.
    pub fn d2_squared_all(&self, t: f64) -> Vec<f64> {
        let n = self.n();
        let phi = self.phi();
        let mut acc = vec![0.0; n];
        for i in 1..n {
            let w = exp(-2.0 * self.lambdas[i] * t);
            if w == 0.0 {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(phi.row(i)) {
                *a += w * v * v;
            }
        }
        for (x, a) in acc.iter_mut().enumerate() {
            *a /= self.pi(x);
        }
        acc
    }

    /// `max_x d_{2,x}(t)^2`.
    pub fn max_d2_squared(&self, t: f64) -> f64 {
        self.d2_squared_all(t).into_iter().fold(0.0, f64::max)
    }

    /// `d_inf(t) = max_y sum_{i>=2} f_i(y)^2 e^{-lambda_i t}`.
    pub fn d_inf(&self, t: f64) -> f64 {
        self.max_d2_squared(0.5 * t)
    }

    /// `sum_{i>=2} e^{-2 lambda_i t}`, the pi-average of `d_{2,x}^2(t)`.
    pub fn ave_d2_squared(&self, t: f64) -> f64 {
        let terms: Vec<f64> = self.lambdas[1..].iter().map(|&l| exp(-2.0 * l * t)).collect();
        pairwise_sum(&terms)
    }

    /// Bisection tolerance shared by all mixing-time searches.
    pub fn time_tol(&self) -> f64 {
        1e-9 * self.t_rel
    }

    /// Smallest `t` with `sum_{i>=2} e^{-2 lambda_i t} <= eps^2`.
    pub fn ave_l2_mix_time(&self, eps: f64) -> f64 {
        if self.n() == 1 {
            return 0.0;
        }
        first_time_below(|t| self.ave_d2_squared(t), eps * eps, self.t_rel, self.time_tol())
    }

    /// Closed-form upper bound for the search bracket: the time where the
    /// slowest mode alone would need to reach `target` after starting at `start`.
    pub fn decay_time(&self, start: f64, target: f64) -> f64 {
        if start <= target {
            0.0
        } else {
            self.t_rel * ln(start / target)
        }
    }

    /// Reconstructs `P^k` from the spectrum; only meaningful for small `k`.
    pub fn discrete_power(&self, k: u32) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |x, y| {
            let r = self.sqrt_pi[y] / self.sqrt_pi[x];
            r * self.spectral_sum(x, y, 0, |l| crate::math::pow(1.0 - l, k as f64))
        })
    }
}
