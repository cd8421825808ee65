//! Mixing times in total variation, L2, L-infinity, average L2 and
//! separation, plus the gap-based upper bounds and the inequality chain
//! tying mixing, relaxation, hitting and cover times together.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::check::Check;
use crate::error::{Error, Result};
use crate::hitting::HittingData;
use crate::math::{abs, exp, first_time_below, ln, pairwise_sum, E};
use crate::spectral::SpectralData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Tv,
    L2,
    Inf,
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [0.5, 0.25, 0.1, 0.05];

/// Starting states over which worst-case distances are maximized. For a
/// transitive chain every start is equivalent.
pub fn worst_case_starts(spec: &ChainSpec) -> Vec<usize> {
    if spec.is_transitive_hint() {
        alloc::vec![0]
    } else {
        (0..spec.n()).collect()
    }
}

/// `sum_y |H_t(x,y) - pi(y)|`.
pub fn l1_distance(sd: &SpectralData, x: usize, t: f64) -> f64 {
    let row = sd.heat_row(x, t);
    let terms: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(y, h)| abs(h - sd.pi(y)))
        .collect();
    pairwise_sum(&terms)
}

/// `max_{x in starts, y} (1 - H_t(x,y)/pi(y))`.
pub fn separation(sd: &SpectralData, starts: &[usize], t: f64) -> f64 {
    let mut worst = 0.0f64;
    for &x in starts {
        let row = sd.heat_row(x, t);
        for (y, h) in row.iter().enumerate() {
            worst = worst.max(1.0 - h / sd.pi(y));
        }
    }
    worst
}

/// Worst-case distance `d_p(t)` over `starts` (L2 and L-infinity are
/// spectral and always maximize over all states).
pub fn distance(sd: &SpectralData, norm: Norm, starts: &[usize], t: f64) -> f64 {
    match norm {
        Norm::Tv => starts
            .iter()
            .map(|&x| 0.5 * l1_distance(sd, x, t))
            .fold(0.0, f64::max),
        Norm::L2 => crate::math::sqrt(sd.max_d2_squared(t)),
        Norm::Inf => sd.d_inf(t),
    }
}

/// `t_mix^TV(eps)` (worst-case TV at most `eps`), `t_mix^(2)(eps)` or
/// `t_mix^(inf)(eps)`.
pub fn mix_time(spec: &ChainSpec, sd: &SpectralData, norm: Norm, eps: f64) -> f64 {
    if spec.n() == 1 {
        return 0.0;
    }
    let starts = worst_case_starts(spec);
    match norm {
        Norm::L2 => {
            let d = |t| sd.max_d2_squared(t);
            first_time_below(d, eps * eps, sd.t_rel, sd.time_tol())
        }
        _ => first_time_below(|t| distance(sd, norm, &starts, t), eps, sd.t_rel, sd.time_tol()),
    }
}

/// `t_mix^(inf)(eps)` from eigenvalues alone; exact for transitive chains,
/// where `H_t(y,y)/pi(y) - 1 = sum_{i>=2} e^{-lambda_i t}` for every `y`.
pub fn mix_time_inf_transitive(sd: &SpectralData, eps: f64) -> f64 {
    if sd.n() == 1 {
        return 0.0;
    }
    let d = |t: f64| {
        let terms: Vec<f64> = sd.lambdas[1..].iter().map(|&l| exp(-l * t)).collect();
        pairwise_sum(&terms)
    };
    first_time_below(d, eps, sd.t_rel, sd.time_tol())
}

/// `t_mix^{(2),x}(eps)`.
pub fn mix_time_from_x(sd: &SpectralData, x: usize, eps: f64) -> f64 {
    if sd.n() == 1 {
        return 0.0;
    }
    first_time_below(|t| sd.d2x_squared(x, t), eps * eps, sd.t_rel, sd.time_tol())
}

/// `t_sep(eps) = inf{t : H_t(x,y) >= (1 - eps) pi(y) for all x, y}`.
pub fn sep_time(spec: &ChainSpec, sd: &SpectralData, eps: f64) -> f64 {
    if spec.n() == 1 {
        return 0.0;
    }
    let starts = worst_case_starts(spec);
    first_time_below(|t| separation(sd, &starts, t), eps, sd.t_rel, sd.time_tol())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub eps_grid: Vec<f64>,
    pub t_mix_tv: Vec<f64>,
    pub t_mix_2: Vec<f64>,
    pub t_mix_inf: Vec<f64>,
    /// Start used for `t_mix_2_from_x`.
    pub x: usize,
    pub t_mix_2_from_x: Vec<f64>,
    pub t_ave_mix_2: Vec<f64>,
    pub t_sep: Vec<f64>,
}

impl MixingProfile {
    pub fn compute(spec: &ChainSpec, sd: &SpectralData, x: usize, eps_grid: &[f64]) -> Result<Self> {
        for &e in eps_grid {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::BadParams(format!("eps must lie in (0, 1), got {e}")));
            }
        }
        if x >= spec.n() {
            return Err(Error::BadParams(format!("state {x} out of range")));
        }
        let map = |f: &dyn Fn(f64) -> f64| eps_grid.iter().map(|&e| f(e)).collect::<Vec<_>>();
        Ok(MixingProfile {
            eps_grid: eps_grid.to_vec(),
            t_mix_tv: map(&|e| mix_time(spec, sd, Norm::Tv, e)),
            t_mix_2: map(&|e| mix_time(spec, sd, Norm::L2, e)),
            t_mix_inf: map(&|e| mix_time(spec, sd, Norm::Inf, e)),
            x,
            t_mix_2_from_x: map(&|e| mix_time_from_x(sd, x, e)),
            t_ave_mix_2: map(&|e| sd.ave_l2_mix_time(e)),
            t_sep: map(&|e| sep_time(spec, sd, e)),
        })
    }
}

/// Tolerance for comparing two bisection results against each other or a
/// closed form.
fn time_tol(sd: &SpectralData, scale: f64) -> f64 {
    4.0 * sd.time_tol() + 1e-12 * abs(scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBounds {
    pub x: usize,
    pub eps: f64,
    pub bound_ave: f64,
    pub bound_x: f64,
    /// Whether `alpha_x gap >= e eps^2` selected the first branch.
    pub first_branch: bool,
    pub t_ave_mix_2: f64,
    pub t_mix_2_from_x: f64,
    pub checks: [Check; 2],
}

/// `t_ave-mix^(2)(1/2) <= log(4 alpha gap) / (2 gap)` and the pointwise
/// bound on `t_mix^{(2),x}(eps)`.
pub fn gap_upper_bounds(sd: &SpectralData, hd: &HittingData, x: usize, eps: f64) -> Result<GapBounds> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::BadParams(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    let gap = sd.gap;
    let bound_ave = ln(4.0 * hd.alpha * gap) / (2.0 * gap);
    let ax = hd.alpha_x[x];
    let e2 = eps * eps;
    let first_branch = ax * gap >= E * e2;
    let bound_x = if first_branch {
        ln(ax * gap / e2) / (2.0 * gap)
    } else {
        (ln(hd.alpha * gap / e2) / (2.0 * gap)).min(ax / (2.0 * e2))
    };
    let t_ave = sd.ave_l2_mix_time(0.5);
    let t_x = mix_time_from_x(sd, x, eps);
    Ok(GapBounds {
        x,
        eps,
        bound_ave,
        bound_x,
        first_branch,
        t_ave_mix_2: t_ave,
        t_mix_2_from_x: t_x,
        checks: [
            Check::le("gap_average_l2_mix", t_ave, bound_ave, time_tol(sd, bound_ave)),
            Check::le("gap_pointwise_l2_mix", t_x, bound_x, time_tol(sd, bound_x)),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub max_value: f64,
    pub argmax_beta: f64,
    pub endpoint_value: f64,
    pub check: Check,
}

/// Brute force over single-atom feasible points of
/// `max sum a_i e^{-2 beta_i t}` s.t. `sum a_i / beta_i = budget`,
/// `beta_i >= lambda2`: with one atom `a = budget beta`, so the value is
/// `budget beta e^{-2 beta t}` on a geometric grid of `beta` in
/// `[lambda2, 1000 lambda2]`. The maximizer should be `beta = lambda2`.
pub fn single_mode_oracle(budget: f64, lambda2: f64, t: f64, grid: usize) -> Result<OracleResult> {
    if grid < 100 {
        return Err(Error::BadParams(format!("grid needs at least 100 points, got {grid}")));
    }
    if !(budget > 0.0 && lambda2 > 0.0) {
        return Err(Error::BadParams("budget and lambda2 must be positive".into()));
    }
    if t < 1.0 / (2.0 * lambda2) {
        return Err(Error::RegimeViolation(format!(
            "the endpoint argument (t = {t} < 1/(2 lambda2) = {})",
            1.0 / (2.0 * lambda2)
        )));
    }
    let value = |beta: f64| budget * beta * exp(-2.0 * beta * t);
    let ratio = ln(1000.0) / (grid - 1) as f64;
    let mut best = (value(lambda2), lambda2);
    for k in 1..grid {
        let beta = lambda2 * exp(ratio * k as f64);
        let v = value(beta);
        if v > best.0 {
            best = (v, beta);
        }
    }
    let endpoint = value(lambda2);
    let check = Check::eq("single_mode_endpoint", best.0, endpoint, 1e-6 * endpoint);
    Ok(OracleResult {
        max_value: best.0,
        argmax_beta: best.1,
        endpoint_value: endpoint,
        check,
    })
}

/// Cover-time estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Inequality chain between relaxation, mixing, hitting and cover times on
/// each grid value.
///
/// Includes the L2 upper bound both with `|log(eps pi_min)|` and with
/// `|log(eps^2 pi_min)|`; only the latter follows from `d_{2,x}^2(t) <=
/// e^{-2 gap t}/pi(x)`.
pub fn hierarchy_report(
    spec: &ChainSpec,
    sd: &SpectralData,
    hd: &HittingData,
    eps_grid: &[f64],
    cover: Option<CoverEstimate>,
) -> Vec<Check> {
    let mut rows = Vec::new();
    let pi_min = spec.pi_min();
    for &eps in eps_grid {
        let tv_half = mix_time(spec, sd, Norm::Tv, eps / 2.0);
        let l2 = mix_time(spec, sd, Norm::L2, eps);
        let inf_sq = mix_time(spec, sd, Norm::Inf, eps * eps);
        let lower = sd.t_rel * abs(ln(eps));
        let upper = 0.5 * sd.t_rel * abs(ln(eps * pi_min));
        let upper_sq = 0.5 * sd.t_rel * abs(ln(eps * eps * pi_min));
        let tag = |c: Check| c.with_note(format!("eps={eps}"));
        rows.push(tag(Check::le("relaxation_le_tv_mix", lower, tv_half, time_tol(sd, lower))));
        rows.push(tag(Check::le("tv_mix_le_l2_mix", tv_half, l2, time_tol(sd, l2))));
        rows.push(tag(Check::eq("l2_mix_half_inf_mix", l2, 0.5 * inf_sq, time_tol(sd, l2))));
        rows.push(tag(Check::le("l2_mix_upper", l2, upper, time_tol(sd, upper))));
        rows.push(tag(Check::le("l2_mix_upper_squared", l2, upper_sq, time_tol(sd, upper_sq))));
    }
    let t_inf = mix_time(spec, sd, Norm::Inf, 0.5);
    rows.push(Check::le("inf_mix_over_nine_le_max_hitting", t_inf / 9.0, hd.h, time_tol(sd, hd.h)));
    let matthews = hd.h * (ln(spec.n() as f64) + 1.0);
    match cover {
        Some(c) => {
            let band = 3.0 * c.stderr;
            rows.push(
                Check::le("max_hitting_le_cover", hd.h, c.mean + band, 1e-12 * hd.h)
                    .with_note("cover estimate plus 3 standard errors"),
            );
            rows.push(
                Check::le("cover_le_matthews_upper", c.mean - band, matthews, 1e-12 * matthews)
                    .with_note("cover estimate minus 3 standard errors"),
            );
        }
        None => {
            rows.push(Check::skipped("max_hitting_le_cover", "no cover estimate"));
            rows.push(Check::skipped("cover_le_matthews_upper", "no cover estimate"));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Family;
    use core::f64::consts::LN_2;

    fn setup(f: Family) -> (ChainSpec, SpectralData, HittingData) {
        let spec = ChainSpec::from_family(&f).unwrap();
        let sd = SpectralData::decompose(&spec).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        (spec, sd, hd)
    }

    #[test]
    fn two_state_closed_forms() {
        let (spec, sd, hd) = setup(Family::TwoState { p: 0.5, q: 0.5 });
        assert!(abs(mix_time(&spec, &sd, Norm::L2, 0.5) - LN_2) < 1e-9);
        let inf = mix_time(&spec, &sd, Norm::Inf, 0.25);
        assert!(abs(inf - 2.0 * LN_2) < 1e-9);
        assert!(abs(sep_time(&spec, &sd, 0.5) - LN_2) < 1e-9);
        let g = gap_upper_bounds(&sd, &hd, 0, 0.5).unwrap();
        assert!(g.first_branch);
        assert!(abs(g.bound_ave - LN_2) < 1e-12);
        assert!(abs(g.bound_x - LN_2) < 1e-12);
        assert!(g.checks.iter().all(Check::passed));
    }

    #[test]
    fn tv_bisection_matches_grid_scan() {
        let (spec, sd, _) = setup(Family::Complete { n: 3 });
        let t = mix_time(&spec, &sd, Norm::Tv, 0.1);
        // From x: H_t(x,x) - 1/3 = (2/3) e^{-3t/2}; TV = (2/3) e^{-3t/2}.
        let exact = -ln(0.1 * 1.5) / 1.5;
        assert!(abs(t - exact) < 1e-8);
        let step = sd.t_rel / 1000.0;
        let scan = (0..)
            .map(|k| k as f64 * step)
            .find(|&s| distance(&sd, Norm::Tv, &[0, 1, 2], s) <= 0.1)
            .unwrap();
        assert!(scan >= t - 1e-9 && scan - t <= step);
    }

    #[test]
    fn transitive_inf_shortcut() {
        let (spec, sd, _) = setup(Family::GridTorus { n: 6, m: 4 });
        for eps in [0.5, 0.1] {
            let a = mix_time(&spec, &sd, Norm::Inf, eps);
            let b = mix_time_inf_transitive(&sd, eps);
            assert!(abs(a - b) < 1e-8);
        }
    }

    #[test]
    fn oracle_endpoint() {
        let r = single_mode_oracle(1.0, 1.0, 1.0, 200).unwrap();
        assert!(abs(r.max_value - exp(-2.0)) < 1e-15);
        assert_eq!(r.argmax_beta, 1.0);
        assert!(r.check.passed());
        let t = 0.5 * ln(10.0);
        let r = single_mode_oracle(2.5, 1.0, t, 100).unwrap();
        assert!(abs(r.max_value - 0.25) < 1e-12);
        assert!(matches!(
            single_mode_oracle(1.0, 1.0, 0.4, 200),
            Err(Error::RegimeViolation(_))
        ));
    }

    #[test]
    fn profile_monotone_and_ordered() {
        let (spec, sd, _) = setup(Family::RandomReversible { n: 12, seed: 5 });
        let mp = MixingProfile::compute(&spec, &sd, 3, &DEFAULT_EPS_GRID).unwrap();
        for w in 0..3 {
            assert!(mp.t_mix_2[w] <= mp.t_mix_2[w + 1]);
            assert!(mp.t_mix_tv[w] <= mp.t_mix_tv[w + 1]);
            assert!(mp.t_sep[w] <= mp.t_sep[w + 1]);
        }
        for k in 0..4 {
            assert!(mp.t_mix_tv[k] <= mp.t_mix_2[k] + 1e-9);
            assert!(mp.t_sep[k] <= mp.t_mix_inf[k] + 1e-9);
        }
    }
}
