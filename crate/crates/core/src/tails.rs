//! Exact hitting-time tails from killed-chain spectral decompositions,
//! quasi-stationary distributions, induced (watched) chains and local times.
//!
//! For `B = V \ A` the killed generator `K = (I - P)|_B` is similar to the
//! symmetric `D_B^{1/2} K D_B^{-1/2}`. With its eigenpairs `(l_k, v_k)`,
//! `Pr_nu[T_A > t] = sum_k e^{-l_k t} (sum_x nu(x) v_k(x)/sqrt(pi(x))) (sum_y v_k(y) sqrt(pi(y)))`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::{components_within, ChainSpec};
use crate::check::{worst, Check};
use crate::error::{bad_params, Error, Result};
use crate::hitting::HittingData;
use crate::linalg::{Lu, Matrix, SymmetricEigen};
use crate::math::{abs, exp, ln, pairwise_sum, pow, sqrt};
use crate::mixing::{mix_time, sep_time, Norm};
use crate::spectral::{symmetrized_laplacian, SpectralData};

/// Probability tolerance for comparisons of exact tails.
const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KilledChainData {
    /// Target set, sorted.
    pub a: Vec<usize>,
    /// Complement of `a`, sorted.
    pub b: Vec<usize>,
    /// Eigenvalues of the killed generator, ascending.
    pub lambdas: Vec<f64>,
    /// Smallest eigenvalue `lambda(A)`.
    pub lambda_a: f64,
    /// Quasi-stationary distribution as a vector over all states (zero on `a`).
    pub mu_a: Vec<f64>,
    /// Row `k` is the unit eigenvector for `lambdas[k]`, indexed like `b`.
    vecs: Matrix,
    sqrt_pi: Vec<f64>,
    /// `sum_y v_k(y) sqrt(pi(y))`.
    right: Vec<f64>,
    /// Position of each state in `b`, or `usize::MAX` for states of `a`.
    pos: Vec<usize>,
}

fn normalize_set(n: usize, a: &[usize]) -> Result<Vec<usize>> {
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    if let Some(&x) = a.iter().find(|&&x| x >= n) {
        return Err(bad_params(format!("state {x} out of range for n={n}")));
    }
    Ok(a)
}

impl KilledChainData {
    pub fn new(spec: &ChainSpec, a: &[usize]) -> Result<Self> {
        spec.require_reversible()?;
        let n = spec.n();
        let a = normalize_set(n, a)?;
        if a.is_empty() || a.len() == n {
            return Err(bad_params("target set must be non-empty and proper"));
        }
        let mut pos = vec![usize::MAX; n];
        let b: Vec<usize> = (0..n).filter(|x| a.binary_search(x).is_err()).collect();
        for (i, &x) in b.iter().enumerate() {
            pos[x] = i;
        }
        let comps = components_within(spec.p(), &b);
        if comps.len() > 1 {
            return Err(Error::DisconnectedComplement { components: comps });
        }
        let sqrt_pi: Vec<f64> = spec.pi().iter().map(|&p| sqrt(p)).collect();
        let k = symmetrized_laplacian(spec.p(), &sqrt_pi, &b);
        let eig = SymmetricEigen::new(k)?;
        let mut vecs = eig.vectors.expect("eigenvectors requested");
        // Perron vector of the killed chain is positive.
        if vecs.row(0).iter().sum::<f64>() < 0.0 {
            vecs.row_mut(0).iter_mut().for_each(|v| *v = -*v);
        }
        let right: Vec<f64> = (0..b.len())
            .map(|k| {
                let t: Vec<f64> = b.iter().enumerate().map(|(i, &y)| vecs[(k, i)] * sqrt_pi[y]).collect();
                pairwise_sum(&t)
            })
            .collect();
        let mut mu_a = vec![0.0; n];
        let mut total = 0.0;
        for (i, &x) in b.iter().enumerate() {
            let v = (vecs[(0, i)] * sqrt_pi[x]).max(0.0);
            mu_a[x] = v;
            total += v;
        }
        mu_a.iter_mut().for_each(|v| *v /= total);
        Ok(KilledChainData {
            lambda_a: eig.values[0],
            lambdas: eig.values,
            mu_a,
            vecs,
            sqrt_pi,
            right,
            pos,
            a,
            b,
        })
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    /// Coefficients `c_k` with `Pr_nu[T_A > t] = sum_k c_k e^{-l_k t}`;
    /// `nu` is a measure on all states (mass on `A` contributes nothing).
    pub fn tail_coeffs(&self, nu: &[f64]) -> Vec<f64> {
        (0..self.b.len())
            .map(|k| {
                let t: Vec<f64> = self
                    .b
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| nu[x] * self.vecs[(k, i)] / self.sqrt_pi[x])
                    .collect();
                pairwise_sum(&t) * self.right[k]
            })
            .collect()
    }

    pub fn tail_from_coeffs(&self, c: &[f64], t: f64) -> f64 {
        let terms: Vec<f64> = c.iter().zip(&self.lambdas).map(|(c, l)| c * exp(-l * t)).collect();
        pairwise_sum(&terms)
    }

    /// `Pr_nu[T_A > t]`.
    pub fn tail(&self, nu: &[f64], t: f64) -> f64 {
        self.tail_from_coeffs(&self.tail_coeffs(nu), t)
    }

    /// `Pr_y[T_A > t]`.
    pub fn tail_from_state(&self, y: usize, t: f64) -> f64 {
        let i = self.pos[y];
        if i == usize::MAX {
            return 0.0;
        }
        let terms: Vec<f64> = (0..self.b.len())
            .map(|k| self.vecs[(k, i)] / self.sqrt_pi[y] * self.right[k] * exp(-self.lambdas[k] * t))
            .collect();
        pairwise_sum(&terms)
    }

    /// `E_nu[T_A] = sum_k c_k / l_k`.
    pub fn expected_hit(&self, nu: &[f64]) -> f64 {
        let c = self.tail_coeffs(nu);
        let terms: Vec<f64> = c.iter().zip(&self.lambdas).map(|(c, l)| c / l).collect();
        pairwise_sum(&terms)
    }

    /// `kappa_s(y, z) = Pr_y[X_s = z, T_A > s]` for every `z`.
    pub fn kernel_row(&self, y: usize, s: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.n()];
        let i = self.pos[y];
        if i == usize::MAX {
            return row;
        }
        let m = self.b.len();
        let mut acc = vec![0.0; m];
        for k in 0..m {
            let c = self.vecs[(k, i)] * exp(-self.lambdas[k] * s);
            crate::linalg::axpy(&mut acc, c, self.vecs.row(k));
        }
        for (j, &z) in self.b.iter().enumerate() {
            row[z] = acc[j] * self.sqrt_pi[z] / self.sqrt_pi[y];
        }
        row
    }

    /// The killed matrix `P_A`: `P` with the rows and columns of `A` zeroed.
    pub fn p_a(&self, spec: &ChainSpec) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |x, y| {
            if self.pos[x] == usize::MAX || self.pos[y] == usize::MAX {
                0.0
            } else {
                spec.p()[(x, y)]
            }
        })
    }

    /// `max |(mu_A (I - P)|_B - lambda(A) mu_A)(x)|`.
    pub fn eigen_residual(&self, spec: &ChainSpec) -> f64 {
        let p = spec.p();
        let mut worst = 0.0f64;
        for &y in &self.b {
            let mut v = self.mu_a[y] * (1.0 - self.lambda_a);
            for &x in &self.b {
                v -= self.mu_a[x] * p[(x, y)];
            }
            worst = worst.max(abs(v));
        }
        worst
    }
}

pub fn killed_chain(spec: &ChainSpec, a: &[usize]) -> Result<KilledChainData> {
    KilledChainData::new(spec, a)
}

/// `Pr_start[T_A > t]`, exact.
pub fn tail_exact(spec: &ChainSpec, start: &[f64], a: &[usize], t: f64) -> Result<f64> {
    if start.len() != spec.n() {
        return Err(bad_params("start distribution has the wrong length"));
    }
    Ok(KilledChainData::new(spec, a)?.tail(start, t))
}

/// Geometric grid `[lo, hi] * scale` with `points` entries.
pub fn geometric_grid(lo: f64, hi: f64, points: usize, scale: f64) -> Vec<f64> {
    if points == 1 {
        return vec![lo * scale];
    }
    let r = ln(hi / lo) / (points - 1) as f64;
    (0..points).map(|k| scale * lo * exp(r * k as f64)).collect()
}

/// Upper bound on `sup_t |F(t) - e^{-t}|` for non-increasing `F`, certified
/// by the monotone envelope on each grid interval and refined by bisection
/// where the envelope exceeds `target`. Returns `(envelope_bound, attained)`.
fn sup_deviation(f: impl Fn(f64) -> f64, t_end: f64, base: &[f64], target: f64) -> (f64, f64) {
    let mut pts: Vec<(f64, f64)> = base.iter().map(|&t| (t, f(t))).collect();
    let dev = |(t, v): (f64, f64)| abs(v - exp(-t));
    let env = |a: (f64, f64), b: (f64, f64)| (a.1 - exp(-b.0)).max(exp(-a.0) - b.1);
    let mut attained = pts.iter().map(|&p| dev(p)).fold(0.0, f64::max);
    let mut bound = attained;
    let mut stack: Vec<((f64, f64), (f64, f64), u32)> =
        pts.windows(2).map(|w| (w[0], w[1], 0)).collect();
    pts.clear();
    while let Some((a, b, depth)) = stack.pop() {
        let e = env(a, b);
        if e <= target || depth >= 60 || b.0 - a.0 <= 1e-15 * t_end {
            bound = bound.max(e);
            continue;
        }
        let mid_t = 0.5 * (a.0 + b.0);
        let mid = (mid_t, f(mid_t));
        attained = attained.max(dev(mid));
        stack.push((a, mid, depth + 1));
        stack.push((mid, b, depth + 1));
    }
    // Tail beyond the grid: both functions lie in [0, F(t_end)] and [0, e^{-t_end}].
    let last_f = f(t_end);
    bound = bound.max(last_f.max(exp(-t_end)));
    (bound.max(attained), attained)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiStationaryReport {
    pub lambda_a: f64,
    pub e_mu: f64,
    pub e_pi: f64,
    pub t_rel: f64,
    pub checks: Vec<Check>,
}

/// Every quasi-stationary and Aldous-Brown style estimate for target `A` on
/// `t_grid`. `Pr_pi` means the chain started from `pi` on all of `V`.
pub fn check_quasistationary_bounds(
    spec: &ChainSpec,
    sd: &SpectralData,
    a: &[usize],
    t_grid: &[f64],
) -> Result<QuasiStationaryReport> {
    let kc = KilledChainData::new(spec, a)?;
    let pi = spec.pi();
    let pi_b: f64 = kc.b.iter().map(|&x| pi[x]).sum();
    let cond: Vec<f64> = (0..spec.n())
        .map(|x| if kc.pos[x] == usize::MAX { 0.0 } else { pi[x] / pi_b })
        .collect();
    let c_cond = kc.tail_coeffs(&cond);
    let c_mu = kc.tail_coeffs(&kc.mu_a);
    let c_pi = kc.tail_coeffs(pi);
    let lam = kc.lambda_a;
    let e_mu = 1.0 / lam;
    let e_pi = kc.expected_hit(pi);
    let t_rel = sd.t_rel;
    let tail = |c: &[f64], t: f64| kc.tail_from_coeffs(c, t);

    let mut checks = Vec::new();
    checks.push(Check::eq(
        "quasi_stationary_mean",
        kc.expected_hit(&kc.mu_a),
        e_mu,
        1e-8 * e_mu,
    ));
    checks.push(Check::le(
        "quasi_stationary_eigen_residual",
        kc.eigen_residual(spec),
        0.0,
        1e-9,
    ));
    checks.push(worst(
        "quasi_stationary_exponential",
        t_grid.iter().map(|&t| Check::eq("", tail(&c_mu, t), exp(-lam * t), PROB_TOL)),
    ));
    checks.push(worst(
        "quasi_stationary_domination",
        t_grid.iter().map(|&t| Check::le("", tail(&c_cond, t), exp(-lam * t), PROB_TOL)),
    ));
    let sub: Vec<f64> = t_grid.iter().step_by((t_grid.len() / 40).max(1)).copied().collect();
    checks.push(worst(
        "new_worse_than_used",
        sub.iter().flat_map(|&t| {
            let ft = tail(&c_cond, t);
            sub.iter()
                .map(|&s| Check::le("", ft * tail(&c_cond, s), tail(&c_cond, t + s), PROB_TOL))
                .collect::<Vec<_>>()
        }),
    ));

    // Supremum over scaled time of |Pr_pi[T_A > t E_pi T_A] - e^{-t}|.
    let rhs = t_rel / e_mu;
    let mut base = vec![0.0];
    base.extend(geometric_grid(1e-3, 20.0, 200, 1.0));
    let f = |s: f64| tail(&c_pi, s * e_pi);
    let (bound, attained) = sup_deviation(f, 20.0, &base, rhs);
    checks.push(
        Check::le("aldous_brown_sup_deviation", bound, rhs, 1e-9)
            .with_note(format!("largest sampled deviation {attained:.6e}")),
    );

    let pref = 1.0 - 1.0 / e_mu;
    if pref < 0.0 {
        checks.push(Check::skipped(
            "aldous_brown_lower_tail",
            format!("prefactor 1 - 1/E_mu = {pref:.6e} is negative"),
        ));
    } else {
        checks.push(worst(
            "aldous_brown_lower_tail",
            t_grid.iter().map(|&t| Check::ge("", tail(&c_pi, t), pref * exp(-t / e_mu), PROB_TOL)),
        ));
    }
    let pref_rel = 1.0 - t_rel / e_mu;
    if pref_rel < 0.0 {
        checks.push(Check::skipped(
            "aldous_brown_lower_tail_relaxation",
            format!("prefactor 1 - t_rel/E_mu = {pref_rel:.6e} is negative"),
        ));
    } else {
        checks.push(worst(
            "aldous_brown_lower_tail_relaxation",
            t_grid.iter().map(|&t| Check::ge("", tail(&c_pi, t), pref_rel * exp(-t / e_mu), PROB_TOL)),
        ));
    }
    checks.push(Check::le(
        "aldous_brown_mean",
        e_mu,
        e_pi + t_rel,
        1e-9 * (e_pi + t_rel),
    ));
    Ok(QuasiStationaryReport {
        lambda_a: lam,
        e_mu,
        e_pi,
        t_rel,
        checks,
    })
}

/// Default time grid for tail checks on target `A`: 200 geometric points in
/// `[1e-3, 20] E_pi[T_A]`, plus 0.
pub fn default_tail_grid(spec: &ChainSpec, a: &[usize]) -> Result<Vec<f64>> {
    let kc = KilledChainData::new(spec, a)?;
    let e_pi = kc.expected_hit(spec.pi());
    let mut g = vec![0.0];
    g.extend(geometric_grid(1e-3, 20.0, 200, e_pi));
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointTailReport {
    pub t_mix_inf: f64,
    /// `|log eps| / lambda_2`.
    pub s_eps: f64,
    /// `int_0^{s_eps} H_t(x,x) dt`.
    pub nu_s: f64,
    pub checks: Vec<Check>,
}

/// Tail estimates for `T_x` from a fixed start `y`:
/// `Pr_y[T_x > t + 2 t_inf(eps)] <= (1+eps) Pr_y[T_x > t_inf(eps)] exp(-t/(alpha_x + t_rel))`
/// and, for transitive chains with `t >= s(eps)`,
/// `Pr_y[T_x > t_inf(eps) + M t] >= Pr_y[T_x > t_inf(eps)] (1 - c)^M`,
/// `c = (1+eps)(t + s(eps)) / (alpha (1-eps))`. The second is skipped when
/// `1 - c < 0`.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_tail_bounds(
    spec: &ChainSpec,
    sd: &SpectralData,
    hd: &HittingData,
    x: usize,
    y: usize,
    eps: f64,
    t_grid: &[f64],
    m_grid: &[u32],
) -> Result<FixedPointTailReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(bad_params(format!("eps must lie in (0, 1), got {eps}")));
    }
    if spec.n() < 2 {
        return Err(bad_params("need at least two states"));
    }
    let kc = KilledChainData::new(spec, &[x])?;
    let t_inf = mix_time(spec, sd, Norm::Inf, eps);
    let s_eps = abs(ln(eps)) / sd.gap;
    let nu_s = sd.green(x, x, s_eps);
    let base = kc.tail_from_state(y, t_inf);
    let mut checks = Vec::new();
    let rate = 1.0 / (hd.alpha_x[x] + sd.t_rel);
    checks.push(worst(
        "tail_upper_from_point",
        t_grid.iter().map(|&t| {
            let lhs = kc.tail_from_state(y, t + 2.0 * t_inf);
            Check::le("", lhs, (1.0 + eps) * base * exp(-t * rate), PROB_TOL)
        }),
    ));
    checks.push(Check::ge(
        "local_time_lower",
        nu_s,
        hd.alpha_x[x] * (1.0 - eps) * spec.pi()[x],
        1e-12,
    ));
    if !spec.is_transitive_hint() {
        checks.push(Check::skipped("tail_lower_from_point", "chain not flagged transitive"));
    } else {
        let mut rows = Vec::new();
        let mut skipped_neg = 0usize;
        let mut skipped_short = 0usize;
        for &t in t_grid {
            if t < s_eps {
                skipped_short += 1;
                continue;
            }
            let c = (1.0 + eps) * (t + s_eps) / (hd.alpha * (1.0 - eps));
            if 1.0 - c < 0.0 {
                skipped_neg += 1;
                continue;
            }
            for &m in m_grid {
                let lhs = kc.tail_from_state(y, t_inf + m as f64 * t);
                rows.push(Check::ge("", lhs, base * pow(1.0 - c, m as f64), PROB_TOL));
            }
        }
        checks.push(worst("tail_lower_from_point", rows).with_note(format!(
            "{skipped_short} grid times below s(eps), {skipped_neg} with negative base skipped"
        )));
    }
    Ok(FixedPointTailReport {
        t_mix_inf: t_inf,
        s_eps,
        nu_s,
        checks,
    })
}

/// `Pr_y[T_x > t + t_sep(eps)] >= (1-eps) Pr_pi[T_x >= t] - Pr_y[T_x <= t_sep(eps)]`.
pub fn separation_tail_check(
    spec: &ChainSpec,
    sd: &SpectralData,
    x: usize,
    y: usize,
    eps: f64,
    t_grid: &[f64],
) -> Result<Check> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(bad_params(format!("eps must lie in (0, 1), got {eps}")));
    }
    let kc = KilledChainData::new(spec, &[x])?;
    let t_sep = sep_time(spec, sd, eps);
    let c_pi = kc.tail_coeffs(spec.pi());
    let hit_by_sep = 1.0 - kc.tail_from_state(y, t_sep);
    Ok(worst(
        "separation_tail",
        t_grid.iter().map(|&t| {
            let from_pi = if t == 0.0 { 1.0 } else { kc.tail_from_coeffs(&c_pi, t) };
            let lhs = kc.tail_from_state(y, t + t_sep);
            Check::ge("", lhs, (1.0 - eps) * from_pi - hit_by_sep, PROB_TOL)
        }),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedChain {
    pub a: Vec<usize>,
    pub q: Matrix,
    /// Stationary law of `q`: `pi(x)(1 - P(x,x))` on `a`, normalized. Equal
    /// to `pi` conditioned on `a` when `P` has no self-loops.
    pub stationary: Vec<f64>,
}

/// The chain watched on `A`, built from the jump chain (self-loops removed):
/// `Q = J_AA + J_AB (I - J_BB)^{-1} J_BA`.
pub fn induced_chain(spec: &ChainSpec, a: &[usize]) -> Result<InducedChain> {
    let n = spec.n();
    let a = normalize_set(n, a)?;
    if a.is_empty() {
        return Err(bad_params("induced chain needs a non-empty set"));
    }
    let p = spec.p();
    let jump = |x: usize, y: usize| {
        let stay = p[(x, x)];
        if x == y {
            if stay >= 1.0 {
                1.0
            } else {
                0.0
            }
        } else if stay >= 1.0 {
            0.0
        } else {
            p[(x, y)] / (1.0 - stay)
        }
    };
    let b: Vec<usize> = (0..n).filter(|x| a.binary_search(x).is_err()).collect();
    let mut q = Matrix::from_fn(a.len(), a.len(), |i, j| jump(a[i], a[j]));
    if !b.is_empty() {
        let ibb = Matrix::from_fn(b.len(), b.len(), |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - jump(b[i], b[j])
        });
        let jba = Matrix::from_fn(b.len(), a.len(), |i, j| jump(b[i], a[j]));
        let absorbed = Lu::new(ibb)?.solve_matrix(&jba);
        for i in 0..a.len() {
            for (k, &z) in b.iter().enumerate() {
                let w = jump(a[i], z);
                if w != 0.0 {
                    crate::linalg::axpy(q.row_mut(i), w, absorbed.row(k));
                }
            }
        }
    }
    let mut stationary: Vec<f64> = a.iter().map(|&x| spec.pi()[x] * (1.0 - p[(x, x)])).collect();
    let total: f64 = stationary.iter().sum();
    stationary.iter_mut().for_each(|v| *v /= total);
    Ok(InducedChain { a, q, stationary })
}

impl InducedChain {
    pub fn row_sum_deviation(&self) -> f64 {
        (0..self.q.rows())
            .map(|i| abs(self.q.row(i).iter().sum::<f64>() - 1.0))
            .fold(0.0, f64::max)
    }

    pub fn stationarity_residual(&self) -> f64 {
        crate::chain::stationarity_residual(&self.q, &self.stationary)
    }

    /// Expected number of watched steps `E^Q_x[T_y]`, indexed by positions in `a`.
    pub fn hitting_times(&self) -> Result<Matrix> {
        let k = self.a.len();
        let mut et = Matrix::zeros(k, k);
        for y in 0..k {
            let rest: Vec<usize> = (0..k).filter(|&x| x != y).collect();
            if rest.is_empty() {
                continue;
            }
            let m = Matrix::from_fn(rest.len(), rest.len(), |i, j| {
                let id = if i == j { 1.0 } else { 0.0 };
                id - self.q[(rest[i], rest[j])]
            });
            let sol = Lu::new(m)?.solve(&vec![1.0; rest.len()]);
            for (&x, v) in rest.iter().zip(sol) {
                et[(x, y)] = v;
            }
        }
        Ok(et)
    }

    /// Largest watched hitting time between states of `a`.
    pub fn max_hitting_time(&self) -> Result<f64> {
        Ok(self.hitting_times()?.as_slice().iter().copied().fold(0.0, f64::max))
    }
}

/// For a transitive chain without self-loops and a set `A` that is an orbit
/// of a transitive symmetry group (e.g. a torus strip):
/// `E^Q_x[T_y] = |A| int_0^inf (H_t(y,y) - H_t(x,y)) dt = |A| (Z_yy - Z_xy)`.
pub fn induced_hitting_identity(hd: &HittingData, ic: &InducedChain) -> Result<Check> {
    let et = ic.hitting_times()?;
    let k = ic.a.len() as f64;
    let mut worst_dev = 0.0f64;
    let mut max_q = 0.0f64;
    for (i, &x) in ic.a.iter().enumerate() {
        for (j, &y) in ic.a.iter().enumerate() {
            let direct = k * (hd.z[(y, y)] - hd.z[(x, y)]);
            worst_dev = worst_dev.max(abs(et[(i, j)] - direct));
            max_q = max_q.max(et[(i, j)]);
        }
    }
    Ok(Check::le("induced_hitting_identity", worst_dev, 1e-6 * max_q.max(1.0), 0.0)
        .with_note(format!("max watched hitting time {max_q:.6e}")))
}

/// Largest chain for which [`diagonal_dominance_check`] scans every column.
const FULL_DOMINANCE_SCAN: usize = 256;

/// `H_t(y,y) >= H_t(x,y)` for all `x` on a time grid (transitive chains).
/// Every column `y` is scanned up to 256 states, 16 spread columns beyond.
pub fn diagonal_dominance_check(sd: &SpectralData, t_grid: &[f64]) -> Check {
    let n = sd.n();
    let columns: Vec<usize> = if n <= FULL_DOMINANCE_SCAN {
        (0..n).collect()
    } else {
        (0..16).map(|k| k * n / 16).collect()
    };
    worst(
        "heat_kernel_diagonal_dominance",
        t_grid.iter().map(|&t| {
            let mut w = f64::INFINITY;
            let mut pair = (0.0, 0.0);
            for &y in &columns {
                // column y from row y by reversibility
                let row = sd.heat_row(y, t);
                let hyy = row[y];
                for x in 0..n {
                    let hxy = row[x] * sd.pi(y) / sd.pi(x);
                    if hyy - hxy < w {
                        w = hyy - hxy;
                        pair = (hxy, hyy);
                    }
                }
            }
            Check::le("", pair.0, pair.1, 1e-12)
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTimes {
    pub conditioned: f64,
    pub unconditioned: f64,
}

/// Expected time spent at `x` during `(s, s+t]` from `y`, with and without
/// conditioning on `T_x > s`.
pub fn local_time_expect(
    spec: &ChainSpec,
    sd: &SpectralData,
    y: usize,
    x: usize,
    s: f64,
    t: f64,
) -> Result<LocalTimes> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(bad_params("s and t must be non-negative"));
    }
    if x == y {
        return Err(bad_params("conditioning needs y != x"));
    }
    local_times_killed(&KilledChainData::new(spec, &[x])?, sd, y, x, s, t)
}

/// [`local_time_expect`] with the chain killed at `x` already built.
fn local_times_killed(kc: &KilledChainData, sd: &SpectralData, y: usize, x: usize, s: f64, t: f64) -> Result<LocalTimes> {
    let unconditioned = sd.green(y, x, s + t) - sd.green(y, x, s);
    let survive = kc.tail_from_state(y, s);
    if survive < 1e-14 {
        return Err(Error::NullConditioning { probability: survive });
    }
    let row = kc.kernel_row(y, s);
    let terms: Vec<f64> = row
        .iter()
        .enumerate()
        .filter(|(_, k)| **k != 0.0)
        .map(|(z, k)| k * sd.green(z, x, t))
        .collect();
    Ok(LocalTimes {
        conditioned: pairwise_sum(&terms) / survive,
        unconditioned,
    })
}

/// Conditioned local time is at most unconditioned, on an `(s, t)` grid;
/// only asserted for transitive chains.
pub fn local_time_check(
    spec: &ChainSpec,
    sd: &SpectralData,
    y: usize,
    x: usize,
    grid: &[(f64, f64)],
) -> Result<Check> {
    if !spec.is_transitive_hint() {
        return Ok(Check::skipped("conditioned_local_time", "chain not flagged transitive"));
    }
    if x == y {
        return Err(bad_params("conditioning needs y != x"));
    }
    let kc = KilledChainData::new(spec, &[x])?;
    let mut rows = Vec::new();
    for &(s, t) in grid {
        if !(s >= 0.0 && t >= 0.0) {
            return Err(bad_params("s and t must be non-negative"));
        }
        let lt = local_times_killed(&kc, sd, y, x, s, t)?;
        rows.push(Check::le("", lt.conditioned, lt.unconditioned, 1e-10 * lt.unconditioned.max(1.0)));
    }
    Ok(worst("conditioned_local_time", rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
}

/// `G_t(a,b)/G_t(b,b) <= Pr_a[T_b <= t] <= G_{t+s}(a,b)/G_s(b,b)` with
/// `G_t(x,y) = int_0^t H_r(x,y) dr`. The upper side is not clamped at 1.
pub fn hit_prob_sandwich(
    spec: &ChainSpec,
    sd: &SpectralData,
    a: usize,
    b: usize,
    t: f64,
    s: f64,
) -> Result<Sandwich> {
    let kc = if a == b { None } else { Some(KilledChainData::new(spec, &[b])?) };
    sandwich_killed(kc.as_ref(), sd, a, b, t, s)
}

fn sandwich_killed(kc: Option<&KilledChainData>, sd: &SpectralData, a: usize, b: usize, t: f64, s: f64) -> Result<Sandwich> {
    if !(t > 0.0 && s > 0.0) {
        return Err(bad_params("t and s must be positive"));
    }
    let exact = match kc {
        None => 1.0,
        Some(kc) => 1.0 - kc.tail_from_state(a, t),
    };
    Ok(Sandwich {
        lower: sd.green(a, b, t) / sd.green(b, b, t),
        exact,
        upper: sd.green(a, b, t + s) / sd.green(b, b, s),
    })
}

/// Both sides of the sandwich on a `(t, s)` grid, as two rows.
pub fn hit_prob_sandwich_checks(
    spec: &ChainSpec,
    sd: &SpectralData,
    a: usize,
    b: usize,
    grid: &[(f64, f64)],
) -> Result<[Check; 2]> {
    let kc = if a == b { None } else { Some(KilledChainData::new(spec, &[b])?) };
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for &(t, s) in grid {
        let w = sandwich_killed(kc.as_ref(), sd, a, b, t, s)?;
        lo.push(Check::le("", w.lower, w.exact, PROB_TOL));
        hi.push(Check::le("", w.exact, w.upper, PROB_TOL));
    }
    Ok([worst("hit_prob_sandwich_lower", lo), worst("hit_prob_sandwich_upper", hi)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Family;
    use crate::check::Verdict;

    fn spec(f: Family) -> ChainSpec {
        ChainSpec::from_family(&f).unwrap()
    }

    #[test]
    fn two_state_killed() {
        let s = spec(Family::TwoState { p: 0.5, q: 0.5 });
        let kc = killed_chain(&s, &[1]).unwrap();
        assert!(abs(kc.lambda_a - 0.5) < 1e-15);
        assert_eq!(kc.mu_a, vec![1.0, 0.0]);
        assert!(abs(kc.expected_hit(&kc.mu_a) - 2.0) < 1e-14);
        for t in [0.0, 0.7, 3.0] {
            assert!(abs(kc.tail_from_state(0, t) - exp(-t / 2.0)) < 1e-15);
        }
        assert_eq!(kc.tail_from_state(1, 0.5), 0.0);
    }

    #[test]
    fn complete_three_killed() {
        let s = spec(Family::Complete { n: 3 });
        let kc = killed_chain(&s, &[2]).unwrap();
        assert!(abs(kc.lambda_a - 0.5) < 1e-14);
        assert!(abs(kc.mu_a[0] - 0.5) < 1e-14 && abs(kc.mu_a[1] - 0.5) < 1e-14);
        assert!(kc.eigen_residual(&s) < 1e-14);
        let sd = SpectralData::decompose(&s).unwrap();
        let grid = default_tail_grid(&s, &[2]).unwrap();
        let r = check_quasistationary_bounds(&s, &sd, &[2], &grid).unwrap();
        assert!(abs(r.e_pi - 4.0 / 3.0) < 1e-13);
        for c in &r.checks {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn singleton_complement() {
        let s = spec(Family::RandomReversible { n: 6, seed: 2 });
        let kc = killed_chain(&s, &[0, 1, 2, 4, 5]).unwrap();
        assert!(abs(kc.lambda_a - (1.0 - s.p()[(3, 3)])) < 1e-14);
    }

    #[test]
    fn disconnected_complement_reported() {
        let s = spec(Family::Cycle { n: 6 });
        match killed_chain(&s, &[0, 3]) {
            Err(Error::DisconnectedComplement { components }) => {
                assert_eq!(components, vec![vec![1, 2], vec![4, 5]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_rows_sum_to_survival() {
        let s = spec(Family::GridTorus { n: 4, m: 3 });
        let kc = killed_chain(&s, &[0]).unwrap();
        for y in [1, 5, 11] {
            let row = kc.kernel_row(y, 1.7);
            let sum: f64 = row.iter().sum();
            assert!(abs(sum - kc.tail_from_state(y, 1.7)) < 1e-13);
            assert_eq!(row[0], 0.0);
        }
    }

    #[test]
    fn induced_chain_cycle_four() {
        let s = spec(Family::Cycle { n: 4 });
        let ic = induced_chain(&s, &[0, 2]).unwrap();
        for v in ic.q.as_slice() {
            assert!(abs(v - 0.5) < 1e-14);
        }
        let full = induced_chain(&s, &[0, 1, 2, 3]).unwrap();
        assert!(full.q.max_abs_diff(s.p()) < 1e-15);
        assert!(ic.stationarity_residual() < 1e-14);
    }

    #[test]
    fn induced_chain_with_self_loops() {
        let s = spec(Family::RandomReversible { n: 7, seed: 4 });
        let ic = induced_chain(&s, &[1, 3, 6]).unwrap();
        assert!(ic.row_sum_deviation() < 1e-12);
        assert!(ic.stationarity_residual() < 1e-12);
    }

    #[test]
    fn sandwich_two_state() {
        let s = spec(Family::TwoState { p: 0.5, q: 0.5 });
        let sd = SpectralData::decompose(&s).unwrap();
        let w = hit_prob_sandwich(&s, &sd, 0, 1, 1.0, 1.0).unwrap();
        assert!(abs(w.exact - (1.0 - exp(-0.5))) < 1e-15);
        assert!(w.lower <= w.exact && w.exact <= w.upper);
    }

    #[test]
    fn local_time_at_zero_delay() {
        let s = spec(Family::Cycle { n: 8 });
        let sd = SpectralData::decompose(&s).unwrap();
        let lt = local_time_expect(&s, &sd, 3, 0, 0.0, 2.0).unwrap();
        assert!(abs(lt.conditioned - lt.unconditioned) < 1e-12);
        let grid = [(0.5, 1.0), (2.0, 3.0), (5.0, 0.5)];
        assert_eq!(local_time_check(&s, &sd, 3, 0, &grid).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sup_deviation_on_exact_exponential() {
        let base = geometric_grid(1e-3, 20.0, 50, 1.0);
        let (b, a) = sup_deviation(|t| exp(-t), 20.0, &base, 1e-6);
        assert!(a < 1e-15);
        assert!(b <= 1e-6);
    }
}
