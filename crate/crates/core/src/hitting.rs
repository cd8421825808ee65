//! Fundamental matrix, expected hitting times and the sets of states that
//! are hit quickly from a given target.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::check::Check;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math::{abs, exp, ln, max_abs, pairwise_sum};
use crate::spectral::SpectralData;

/// Targets checked against independent absorbed solves when `n` is large.
const CROSS_CHECK_TARGETS: usize = 8;
/// Up to this size every target is cross-checked.
const FULL_CROSS_CHECK: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingData {
    /// `Z = (I - P + Pi)^{-1} - Pi`.
    pub z: Matrix,
    /// `et[(x, y)] = E_x[T_y]`.
    pub et: Matrix,
    /// `alpha_x[y] = E_pi[T_y]`.
    pub alpha_x: Vec<f64>,
    pub alpha: f64,
    pub h: f64,
    /// `max_x pi(x)`.
    pub pi_star: f64,
    pub pi: Vec<f64>,
}

/// `E_x[T_target]` for every `x` by solving the absorbed system
/// `(I - P)|_{V \ target} h = 1`.
pub fn absorbed_hitting_column(spec: &ChainSpec, target: usize) -> Result<Vec<f64>> {
    let n = spec.n();
    let rest: Vec<usize> = (0..n).filter(|&x| x != target).collect();
    let mut out = vec![0.0; n];
    if rest.is_empty() {
        return Ok(out);
    }
    let p = spec.p();
    let a = Matrix::from_fn(rest.len(), rest.len(), |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - p[(rest[i], rest[j])]
    });
    let sol = Lu::new(a)?.solve(&vec![1.0; rest.len()]);
    for (&x, v) in rest.iter().zip(sol) {
        out[x] = v;
    }
    Ok(out)
}

impl HittingData {
    pub fn compute(spec: &ChainSpec) -> Result<Self> {
        let n = spec.n();
        let pi = spec.pi().to_vec();
        let p = spec.p();
        let a = Matrix::from_fn(n, n, |x, y| {
            let id = if x == y { 1.0 } else { 0.0 };
            id - p[(x, y)] + pi[y]
        });
        let mut z = Lu::new(a)?.inverse();
        for x in 0..n {
            for (y, v) in z.row_mut(x).iter_mut().enumerate() {
                *v -= pi[y];
            }
        }
        // (I - P) Z = I - Pi
        let pz = p.matmul(&z);
        let mut residual = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let id = if x == y { 1.0 } else { 0.0 };
                let r = z[(x, y)] - pz[(x, y)] - (id - pi[y]);
                residual = residual.max(abs(r));
            }
        }
        if residual > 1e-9 {
            return Err(Error::SingularSolve(format!(
                "fundamental matrix residual {residual:e}"
            )));
        }

        let et = Matrix::from_fn(n, n, |x, y| {
            if x == y {
                0.0
            } else {
                (z[(y, y)] - z[(x, y)]) / pi[y]
            }
        });
        let alpha_x: Vec<f64> = (0..n)
            .map(|y| {
                let terms: Vec<f64> = (0..n).map(|x| pi[x] * et[(x, y)]).collect();
                pairwise_sum(&terms)
            })
            .collect();
        let weighted: Vec<f64> = (0..n).map(|x| pi[x] * alpha_x[x]).collect();
        let alpha = pairwise_sum(&weighted);
        let h = max_abs(et.as_slice().iter().copied());
        let pi_star = pi.iter().copied().fold(0.0, f64::max);
        let hd = HittingData {
            z,
            et,
            alpha_x,
            alpha,
            h,
            pi_star,
            pi,
        };
        hd.cross_check(spec)?;
        Ok(hd)
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    fn cross_check_targets(n: usize) -> Vec<usize> {
        if n <= FULL_CROSS_CHECK {
            (0..n).collect()
        } else {
            let step = n / CROSS_CHECK_TARGETS;
            (0..CROSS_CHECK_TARGETS).map(|k| k * step + k % step.max(1)).collect()
        }
    }

    /// Compares columns of `et` with independent absorbed solves.
    fn cross_check(&self, spec: &ChainSpec) -> Result<()> {
        let tol = 1e-8 * self.h.max(f64::MIN_POSITIVE);
        for y in Self::cross_check_targets(self.n()) {
            let col = absorbed_hitting_column(spec, y)?;
            for (x, v) in col.iter().enumerate() {
                let dev = abs(v - self.et[(x, y)]);
                if dev > tol {
                    return Err(Error::HittingMismatch(format!(
                        "E_{x}[T_{y}]: fundamental matrix gives {:e}, absorbed solve gives {v:e}",
                        self.et[(x, y)]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `max_{x,y} |E_x[T_y] - E_y[T_x]|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                worst = worst.max(abs(self.et[(x, y)] - self.et[(y, x)]));
            }
        }
        worst
    }

    /// Largest deviation among the four quantities
    /// `alpha_y - E_x[T_y]`, `Z_xy / pi(y)`, `Z_yx / pi(x)`, `alpha_x - E_y[T_x]`.
    pub fn z_identity_deviation(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let a = self.alpha_x[y] - self.et[(x, y)];
                let b = self.z[(x, y)] / self.pi[y];
                let c = self.z[(y, x)] / self.pi[x];
                let d = self.alpha_x[x] - self.et[(y, x)];
                let hi = a.max(b).max(c).max(d);
                let lo = a.min(b).min(c).min(d);
                worst = worst.max(hi - lo);
            }
        }
        worst
    }

    /// Largest deviation of `alpha_x` from `Z_xx / pi(x)`.
    pub fn alpha_x_deviation(&self) -> f64 {
        (0..self.n())
            .map(|x| abs(self.alpha_x[x] - self.z[(x, x)] / self.pi[x]))
            .fold(0.0, f64::max)
    }

    pub fn ratio(&self) -> f64 {
        self.h / self.alpha
    }

    /// For transitive chains: hitting times are symmetric and
    /// `1 <= H / alpha <= 2`.
    pub fn transitive_ratio_check(&self) -> Result<[Check; 2]> {
        let asym = self.asymmetry();
        if asym >= 1e-8 * self.h.max(1.0) {
            return Err(Error::NotTransitiveEvidence { asymmetry: asym });
        }
        let r = self.ratio();
        Ok([
            Check::ge("transitive_ratio_lower", r, 1.0, 1e-9),
            Check::le("transitive_ratio_upper", r, 2.0, 1e-9),
        ])
    }

    /// Set `D = {z : alpha_z >= alpha/2}` and the check `pi(D) >= alpha / (4H)`.
    pub fn paley_zygmund_set(&self) -> (Vec<usize>, Check) {
        let set: Vec<usize> = (0..self.n())
            .filter(|&z| self.alpha_x[z] >= 0.5 * self.alpha)
            .collect();
        let mass = pairwise_sum(&set.iter().map(|&z| self.pi[z]).collect::<Vec<_>>());
        let bound = self.alpha / (4.0 * self.h);
        (set, Check::ge("paley_zygmund_mass", mass, bound, 1e-12))
    }
}

/// The tail integral bound used for the general near-set estimate:
/// `int_s^inf (H_t(y,x)/pi(x) - 1) dt <= (1/2) e^{-s gap} (alpha_x + alpha_y)`.
pub fn tail_integral_check(sd: &SpectralData, hd: &HittingData, x: usize, y: usize, s: f64) -> Check {
    let lhs = sd.tail_integral(y, x, s);
    let rhs = 0.5 * exp(-s * sd.gap) * (hd.alpha_x[x] + hd.alpha_x[y]);
    Check::le("tail_integral_decay", lhs, rhs, 1e-9 * hd.alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearSet {
    pub target: usize,
    pub eps: f64,
    pub members: Vec<usize>,
    /// `|set| / |V|` for the transitive set, `pi(set)` for the general one.
    pub size: f64,
    pub check: Check,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParams(format!("eps must lie in (0, 1), got {eps}")))
    }
}

impl NearSet {
    /// `{z : E_z[T_x] <= (1 - eps) alpha}` with the bound
    /// `|set| <= 2 log(2/eps) / (2 log(2/eps) + eps alpha gap) |V|`.
    pub fn transitive(hd: &HittingData, gap: f64, x: usize, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let n = hd.n();
        let cut = (1.0 - eps) * hd.alpha;
        let members: Vec<usize> = (0..n).filter(|&z| hd.et[(z, x)] <= cut).collect();
        let l = 2.0 * ln(2.0 / eps);
        let frac = l / (l + eps * hd.alpha * gap);
        let size = members.len() as f64 / n as f64;
        Ok(NearSet {
            target: x,
            eps,
            size,
            check: Check::le("near_set_transitive_size", size, frac, 1e-12),
            members,
        })
    }

    /// `B(x, eps) = {z : E_z[T_x] <= alpha_x - eps alpha, E_x[T_z] <= alpha_z - eps alpha}`
    /// with `pi(B) <= 2 log(2H/(eps alpha)) / (2 log(2H/(eps alpha)) + eps alpha gap)`.
    pub fn general(hd: &HittingData, gap: f64, x: usize, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let n = hd.n();
        let ea = eps * hd.alpha;
        let members: Vec<usize> = (0..n)
            .filter(|&z| hd.et[(z, x)] <= hd.alpha_x[x] - ea && hd.et[(x, z)] <= hd.alpha_x[z] - ea)
            .collect();
        let mass = pairwise_sum(&members.iter().map(|&z| hd.pi[z]).collect::<Vec<_>>());
        let l = 2.0 * ln(2.0 * hd.h / ea);
        let bound = l / (l + ea * gap);
        Ok(NearSet {
            target: x,
            eps,
            size: mass,
            check: Check::le("near_set_general_measure", mass, bound, 1e-12),
            members,
        })
    }
}

/// Near set for transitive chains; errors if its size bound fails.
pub fn near_set_transitive(hd: &HittingData, sd: &SpectralData, x: usize, eps: f64) -> Result<NearSet> {
    let ns = NearSet::transitive(hd, sd.gap, x, eps)?;
    ns.check.ensure()?;
    Ok(ns)
}

/// General near set `B(x, eps)`; errors if its measure bound fails.
pub fn near_set_general(hd: &HittingData, sd: &SpectralData, x: usize, eps: f64) -> Result<NearSet> {
    let ns = NearSet::general(hd, sd.gap, x, eps)?;
    ns.check.ensure()?;
    Ok(ns)
}

/// `alpha` and `H` for a transitive chain from a single absorbed solve
/// towards state 0; `O(n^3)` once instead of a full inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitiveSummary {
    pub alpha: f64,
    pub h: f64,
}

impl TransitiveSummary {
    pub fn compute(spec: &ChainSpec) -> Result<Self> {
        let col = absorbed_hitting_column(spec, 0)?;
        let terms: Vec<f64> = col.iter().zip(spec.pi()).map(|(e, p)| e * p).collect();
        Ok(TransitiveSummary {
            alpha: pairwise_sum(&terms),
            h: col.iter().copied().fold(0.0, f64::max),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Family;

    fn hd(f: Family) -> HittingData {
        HittingData::compute(&ChainSpec::from_family(&f).unwrap()).unwrap()
    }

    #[test]
    fn two_state_values() {
        let h = hd(Family::TwoState { p: 0.5, q: 0.5 });
        let want = [[0.5, -0.5], [-0.5, 0.5]];
        for x in 0..2 {
            for y in 0..2 {
                assert!(abs(h.z[(x, y)] - want[x][y]) < 1e-14);
            }
        }
        assert!(abs(h.et[(0, 1)] - 2.0) < 1e-14);
        assert!(abs(h.alpha_x[0] - 1.0) < 1e-14);
        assert!(abs(h.ratio() - 2.0) < 1e-14);
    }

    #[test]
    fn complete_three_values() {
        let h = hd(Family::Complete { n: 3 });
        for x in 0..3 {
            for y in 0..3 {
                let want = if x == y { 0.0 } else { 2.0 };
                assert!(abs(h.et[(x, y)] - want) < 1e-13);
            }
        }
        assert!(abs(h.h - 2.0) < 1e-13);
        assert!(abs(h.alpha - 4.0 / 3.0) < 1e-13);
    }

    #[test]
    fn cycle_four_gamblers_ruin() {
        let h = hd(Family::Cycle { n: 4 });
        for x in 0..4usize {
            for y in 0..4usize {
                let d = (x as i64 - y as i64).rem_euclid(4) as f64;
                assert!(abs(h.et[(x, y)] - d * (4.0 - d)) < 1e-12);
            }
            assert!(abs(h.z[(x, x)] / 0.25 - 2.5) < 1e-12);
            let row: f64 = h.z.row(x).iter().sum();
            assert!(abs(row) < 1e-12);
        }
        assert!(abs(h.h - 4.0) < 1e-12);
        let [lo, hi] = h.transitive_ratio_check().unwrap();
        assert!(lo.passed() && hi.passed());
        assert!(abs(h.ratio() - 1.6) < 1e-12);
    }

    #[test]
    fn asymmetric_chain_rejected_as_transitive() {
        let h = hd(Family::RandomReversible { n: 10, seed: 4 });
        assert!(matches!(
            h.transitive_ratio_check(),
            Err(Error::NotTransitiveEvidence { .. })
        ));
        assert!(h.z_identity_deviation() < 1e-8 * h.alpha);
        assert!(h.alpha_x_deviation() < 1e-8 * h.alpha);
    }

    #[test]
    fn near_sets_on_small_chains() {
        let spec = ChainSpec::from_family(&Family::Cycle { n: 64 }).unwrap();
        let sd = SpectralData::decompose(&spec).unwrap();
        let h = HittingData::compute(&spec).unwrap();
        let ns = near_set_transitive(&h, &sd, 0, 0.5).unwrap();
        assert!(ns.members.contains(&0));
        let a = NearSet::transitive(&h, sd.gap, 0, 0.1).unwrap();
        let b = NearSet::transitive(&h, sd.gap, 0, 0.9).unwrap();
        assert!(b.members.iter().all(|z| a.members.contains(z)));

        let spec = ChainSpec::from_family(&Family::RandomReversible { n: 30, seed: 1 }).unwrap();
        let sd = SpectralData::decompose(&spec).unwrap();
        let h = HittingData::compute(&spec).unwrap();
        for x in 0..30 {
            near_set_general(&h, &sd, x, 0.5).unwrap();
        }
    }

    #[test]
    fn transitive_summary_matches_full() {
        let spec = ChainSpec::from_family(&Family::GridTorus { n: 6, m: 3 }).unwrap();
        let h = HittingData::compute(&spec).unwrap();
        let s = TransitiveSummary::compute(&spec).unwrap();
        assert!(abs(s.alpha - h.alpha) < 1e-10);
        assert!(abs(s.h - h.h) < 1e-10);
    }

    #[test]
    fn paley_zygmund_holds() {
        let h = hd(Family::RandomReversible { n: 15, seed: 11 });
        let (set, c) = h.paley_zygmund_set();
        assert!(!set.is_empty());
        assert!(c.passed());
    }
}
