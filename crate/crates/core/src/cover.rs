//! Cover times: Monte Carlo simulation, an exact oracle for tiny chains,
//! Matthews-type and spectral lower bounds, concentration diagnostics and
//! the rows of the torus width sweep.
//!
//! Trials are independent: trial `k` from start `x` uses the ChaCha8 stream
//! `(x << 32) | k` of the run seed, so any scheduling of trials reproduces
//! the same samples.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::check::Check;
use crate::error::{bad_params, Error, Result};
use crate::hitting::HittingData;
use crate::linalg::{Lu, Matrix};
use crate::math::{ln, pairwise_sum, sqrt};
use crate::spectral::SpectralData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// Rate-1 continuous time: each step costs an Exp(1) holding time.
    #[default]
    Continuous,
    /// Number of steps of the discrete chain.
    DiscreteSteps,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Starts {
    All,
    /// State 0 only; enough for transitive chains.
    Single,
    List(Vec<usize>),
}

impl Starts {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let v = match self {
            Starts::All => (0..n).collect(),
            Starts::Single => vec![0],
            Starts::List(l) => {
                if l.is_empty() {
                    return Err(bad_params("empty start list"));
                }
                if let Some(&x) = l.iter().find(|&&x| x >= n) {
                    return Err(bad_params(format!("start {x} out of range for n={n}")));
                }
                l.clone()
            }
        };
        if n > u32::MAX as usize {
            return Err(bad_params("too many states for per-trial streams"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    pub trials: u64,
    pub seed: u64,
    pub starts: Starts,
    pub time_mode: TimeMode,
    /// A trial running past this multiple of the Matthews upper bound is
    /// reported as runaway.
    pub max_time_factor: f64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            trials: 10_000,
            seed: 0,
            starts: Starts::All,
            time_mode: TimeMode::Continuous,
            max_time_factor: 100.0,
        }
    }
}

impl CoverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.trials > u32::MAX as u64 {
            return Err(bad_params(format!("trials must be in 1..=2^32-1, got {}", self.trials)));
        }
        if !(self.max_time_factor >= 2.0) {
            return Err(bad_params(format!(
                "max_time_factor must be at least 2, got {}",
                self.max_time_factor
            )));
        }
        Ok(())
    }
}

/// Row-wise alias tables over the support of `P`.
#[derive(Debug, Clone)]
pub struct CoverSimulator {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl CoverSimulator {
    pub fn new(spec: &ChainSpec) -> Self {
        let n = spec.n();
        let p = spec.p();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut prob = Vec::new();
        let mut alias = Vec::new();
        offsets.push(0);
        for x in 0..n {
            let row = p.row(x);
            let support: Vec<usize> = (0..n).filter(|&y| row[y] > 0.0).collect();
            let k = support.len();
            let total: f64 = support.iter().map(|&y| row[y]).sum();
            let mut scaled: Vec<f64> = support.iter().map(|&y| row[y] * k as f64 / total).collect();
            let mut al: Vec<usize> = (0..k).collect();
            let mut small: Vec<usize> = (0..k).filter(|&i| scaled[i] < 1.0).collect();
            let mut large: Vec<usize> = (0..k).filter(|&i| scaled[i] >= 1.0).collect();
            while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
                al[s] = l;
                scaled[l] -= 1.0 - scaled[s];
                if scaled[l] < 1.0 {
                    large.pop();
                    small.push(l);
                }
            }
            for i in large.into_iter().chain(small) {
                scaled[i] = 1.0;
            }
            for i in 0..k {
                targets.push(support[i] as u32);
                prob.push(scaled[i]);
                alias.push(support[al[i]] as u32);
            }
            offsets.push(targets.len());
        }
        CoverSimulator {
            n,
            offsets,
            targets,
            prob,
            alias,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn step(&self, x: usize, rng: &mut ChaCha8Rng) -> usize {
        let lo = self.offsets[x];
        let k = self.offsets[x + 1] - lo;
        let u: f64 = rng.random::<f64>() * k as f64;
        let i = (u as usize).min(k - 1);
        let frac = u - i as f64;
        if frac < self.prob[lo + i] {
            self.targets[lo + i] as usize
        } else {
            self.alias[lo + i] as usize
        }
    }

    /// Trial RNG for `(seed, start, trial)`.
    pub fn trial_rng(seed: u64, start: usize, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((start as u64) << 32) | trial);
        rng
    }

    /// One cover time from `start`. `limit` is in the units of `mode`.
    pub fn run_trial(
        &self,
        seed: u64,
        start: usize,
        trial: u64,
        mode: TimeMode,
        limit: f64,
    ) -> Result<f64> {
        let mut rng = Self::trial_rng(seed, start, trial);
        let mut visited = vec![0u64; self.n.div_ceil(64)];
        visited[start / 64] |= 1 << (start % 64);
        let mut remaining = self.n - 1;
        let mut x = start;
        let mut time = 0.0f64;
        while remaining > 0 {
            x = self.step(x, &mut rng);
            time += match mode {
                TimeMode::Continuous => -ln(1.0 - rng.random::<f64>()),
                TimeMode::DiscreteSteps => 1.0,
            };
            let (w, b) = (x / 64, 1u64 << (x % 64));
            if visited[w] & b == 0 {
                visited[w] |= b;
                remaining -= 1;
            }
            if time > limit {
                return Err(Error::RunawayTrial {
                    seed,
                    start,
                    trial,
                    limit,
                });
            }
        }
        Ok(time)
    }

    /// Trials `range` from one start, in order.
    pub fn run_trials(
        &self,
        cfg: &CoverConfig,
        start: usize,
        range: core::ops::Range<u64>,
        limit: f64,
    ) -> Result<Vec<f64>> {
        range
            .map(|k| self.run_trial(cfg.seed, start, k, cfg.time_mode, limit))
            .collect()
    }
}

/// Runaway threshold: `factor * H (log n + 1)`.
pub fn runaway_limit(cfg: &CoverConfig, h: f64, n: usize) -> f64 {
    cfg.max_time_factor * matthews_upper(h, n)
}

/// Sequential reference driver: every start, every trial.
pub fn simulate_cover(spec: &ChainSpec, cfg: &CoverConfig, h: f64) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let starts = cfg.starts.resolve(spec.n())?;
    let sim = CoverSimulator::new(spec);
    let limit = runaway_limit(cfg, h, spec.n());
    starts
        .iter()
        .map(|&x| sim.run_trials(cfg, x, 0..cfg.trials, limit))
        .collect()
}

/// Largest chain handled by [`exact_cover_times`].
pub const EXACT_COVER_MAX_N: usize = 12;

/// `E_x[tau_cov]` for every `x`, by solving for expected remaining time on
/// `(state, visited set)` pairs, visited sets in decreasing size.
pub fn exact_cover_times(spec: &ChainSpec) -> Result<Vec<f64>> {
    let n = spec.n();
    if n > EXACT_COVER_MAX_N {
        return Err(bad_params(format!(
            "exact cover oracle supports n <= {EXACT_COVER_MAX_N}, got {n}"
        )));
    }
    let p = spec.p();
    let full = (1usize << n) - 1;
    // remaining[set][x] for x in set
    let mut remaining = vec![vec![0.0; n]; full + 1];
    let mut sets: Vec<usize> = (1..full).collect();
    sets.sort_by_key(|s| core::cmp::Reverse(s.count_ones()));
    for set in sets {
        let members: Vec<usize> = (0..n).filter(|&x| set >> x & 1 == 1).collect();
        let k = members.len();
        let a = Matrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - p[(members[i], members[j])]
        });
        let b: Vec<f64> = members
            .iter()
            .map(|&x| {
                let mut v = 1.0;
                for y in (0..n).filter(|&y| set >> y & 1 == 0) {
                    if p[(x, y)] > 0.0 {
                        v += p[(x, y)] * remaining[set | 1 << y][y];
                    }
                }
                v
            })
            .collect();
        let sol = Lu::new(a)?.solve(&b);
        for (&x, v) in members.iter().zip(sol) {
            remaining[set][x] = v;
        }
    }
    Ok((0..n).map(|x| remaining[1 << x][x]).collect())
}

/// Linear-interpolation sample quantile (`q` in `[0, 1]`) of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverStats {
    pub trials: u64,
    pub starts: Vec<usize>,
    pub per_start_mean: Vec<f64>,
    pub per_start_stderr: Vec<f64>,
    pub tcov_hat: f64,
    /// Start attaining `tcov_hat`.
    pub argmax_start: usize,
    pub tcov_stderr: f64,
    /// Sample standard deviation over mean, from the argmax start.
    pub cv: f64,
    /// 5%, 50% and 95% sample quantiles from the argmax start.
    pub quantiles: [f64; 3],
}

impl CoverStats {
    /// Summarizes `samples[k]`, the trials from `starts[k]`.
    pub fn from_samples(starts: Vec<usize>, samples: &[Vec<f64>]) -> Result<Self> {
        if starts.is_empty() || starts.len() != samples.len() {
            return Err(bad_params("one sample vector per start is required"));
        }
        let trials = samples[0].len();
        if trials == 0 || samples.iter().any(|s| s.len() != trials) {
            return Err(bad_params("every start needs the same positive number of trials"));
        }
        let mut means = Vec::with_capacity(starts.len());
        let mut sds = Vec::with_capacity(starts.len());
        for s in samples {
            let mean = pairwise_sum(s) / trials as f64;
            let sq: Vec<f64> = s.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = if trials > 1 {
                pairwise_sum(&sq) / (trials - 1) as f64
            } else {
                0.0
            };
            means.push(mean);
            sds.push(sqrt(var));
        }
        let mut best = 0;
        for k in 1..means.len() {
            if means[k] > means[best] {
                best = k;
            }
        }
        let root = sqrt(trials as f64);
        let stderr: Vec<f64> = sds.iter().map(|s| s / root).collect();
        let mut sorted = samples[best].clone();
        sorted.sort_by(f64::total_cmp);
        let cv = if means[best] > 0.0 { sds[best] / means[best] } else { 0.0 };
        Ok(CoverStats {
            trials: trials as u64,
            argmax_start: starts[best],
            starts,
            tcov_hat: means[best],
            tcov_stderr: stderr[best],
            per_start_mean: means,
            per_start_stderr: stderr,
            cv,
            quantiles: [
                quantile(&sorted, 0.05),
                quantile(&sorted, 0.5),
                quantile(&sorted, 0.95),
            ],
        })
    }

    /// Per-start means agree within 3 combined standard errors; used as a
    /// symmetry spot check on transitive chains.
    pub fn start_invariance_check(&self) -> Check {
        let mut worst = Check::skipped("cover_start_invariance", "fewer than two starts");
        for a in 0..self.starts.len() {
            for b in a + 1..self.starts.len() {
                let sa = self.per_start_stderr[a];
                let sb = self.per_start_stderr[b];
                let diff = crate::math::abs(self.per_start_mean[a] - self.per_start_mean[b]);
                let c = Check::le("cover_start_invariance", diff, 3.0 * sqrt(sa * sa + sb * sb), 0.0);
                if worst.verdict == crate::check::Verdict::Skipped || c.slack < worst.slack {
                    worst = c;
                }
            }
        }
        worst
    }
}

/// `H (log n + 1)`.
pub fn matthews_upper(h: f64, n: usize) -> f64 {
    h * (ln(n as f64) + 1.0)
}

/// `M(a, b, c) = (1/(4a)) / (c + 8 log(8a) / (8 log(8a) + b))`.
pub fn m_function(a: f64, b: f64, c: f64) -> f64 {
    let l = 8.0 * ln(8.0 * a);
    (1.0 / (4.0 * a)) / (c + l / (l + b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatthewsBounds {
    pub upper: f64,
    pub lower: f64,
    /// The packed set attaining `lower`.
    pub lower_set: Vec<usize>,
    pub spectral_lower_transitive: f64,
    pub spectral_lower_transitive_vacuous: bool,
    pub spectral_lower_general: f64,
    pub spectral_lower_general_vacuous: bool,
}

/// Greedy packing: states in decreasing `alpha_z` order, kept when every
/// hitting time to and from the current set exceeds `threshold`.
pub fn greedy_separated_set(hd: &HittingData, threshold: f64) -> Vec<usize> {
    let n = hd.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| hd.alpha_x[b].total_cmp(&hd.alpha_x[a]).then(a.cmp(&b)));
    let mut set: Vec<usize> = Vec::new();
    for z in order {
        if set
            .iter()
            .all(|&b| hd.et[(z, b)] > threshold && hd.et[(b, z)] > threshold)
        {
            set.push(z);
        }
    }
    set
}

/// `min_{a != b in set} E_a[T_b] log |set|`, zero for sets of size < 2.
pub fn set_lower_bound(hd: &HittingData, set: &[usize]) -> f64 {
    if set.len() < 2 {
        return 0.0;
    }
    let mut min = f64::INFINITY;
    for &a in set {
        for &b in set {
            if a != b {
                min = min.min(hd.et[(a, b)]);
            }
        }
    }
    min * ln(set.len() as f64)
}

/// `(1/4) H log(gap H / 14)`, clamped at zero; the flag marks a clamp.
pub fn spectral_lower_transitive(h: f64, gap: f64) -> (f64, bool) {
    let arg = gap * h / 14.0;
    if arg <= 1.0 {
        (0.0, true)
    } else {
        (0.25 * h * ln(arg), false)
    }
}

/// `(alpha/4) log M(H/alpha, alpha gap, pi_*)`, clamped at zero.
pub fn spectral_lower_general(alpha: f64, h: f64, gap: f64, pi_star: f64) -> (f64, bool) {
    let arg = m_function(h / alpha, alpha * gap, pi_star);
    if !(arg > 1.0) {
        (0.0, true)
    } else {
        (0.25 * alpha * ln(arg), false)
    }
}

pub fn matthews_bounds(hd: &HittingData, sd: &SpectralData) -> MatthewsBounds {
    let mut lower = 0.0;
    let mut lower_set = Vec::new();
    for frac in [0.25, 0.5, 0.75] {
        let set = greedy_separated_set(hd, frac * hd.alpha);
        let v = set_lower_bound(hd, &set);
        if v > lower {
            lower = v;
            lower_set = set;
        }
    }
    let (st, st_vac) = spectral_lower_transitive(hd.h, sd.gap);
    let (sg, sg_vac) = spectral_lower_general(hd.alpha, hd.h, sd.gap, hd.pi_star);
    MatthewsBounds {
        upper: matthews_upper(hd.h, hd.n()),
        lower,
        lower_set,
        spectral_lower_transitive: st,
        spectral_lower_transitive_vacuous: st_vac,
        spectral_lower_general: sg,
        spectral_lower_general_vacuous: sg_vac,
    }
}

/// Cover estimate against every bound. Spectral lower bounds are compared
/// with `tcov_hat - 3 stderr`; the Matthews pair with a 3 stderr band on
/// the outside.
pub fn cover_bound_checks(
    stats: &CoverStats,
    mb: &MatthewsBounds,
    h: f64,
    transitive: bool,
) -> Vec<Check> {
    let band = 3.0 * stats.tcov_stderr;
    let t = stats.tcov_hat;
    let mut rows = vec![
        Check::le("cover_matthews_lower", mb.lower - band, t, 0.0),
        Check::le("cover_matthews_upper", t, mb.upper + band, 0.0),
    ];
    let vac = |c: Check, v: bool| if v { c.with_note("vacuous (clamped at 0)") } else { c };
    if transitive {
        rows.push(vac(
            Check::le("cover_lower_transitive", mb.spectral_lower_transitive, t - band, 0.0),
            mb.spectral_lower_transitive_vacuous,
        ));
    } else {
        rows.push(Check::skipped("cover_lower_transitive", "chain not flagged transitive"));
    }
    rows.push(vac(
        Check::le("cover_lower_general", mb.spectral_lower_general, t - band, 0.0),
        mb.spectral_lower_general_vacuous,
    ));
    if stats.starts.len() > 1 {
        let min_mean = stats.per_start_mean.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(Check::le("cover_min_start_plus_max_hitting", t, min_mean + h + band, 0.0));
    } else {
        rows.push(Check::skipped("cover_min_start_plus_max_hitting", "single start"));
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub gap_times_tcov: f64,
    pub tcov_over_h: f64,
    pub cv: f64,
    pub q95_over_q05: f64,
    pub cv_max: f64,
    pub gap_tcov_min: f64,
    pub verdict: String,
}

pub const DEFAULT_CV_MAX: f64 = 0.25;
pub const DEFAULT_GAP_TCOV_MIN: f64 = 50.0;

/// The verdict is `"concentrating-trend"` iff `cv < cv_max` and
/// `gap * tcov_hat > gap_tcov_min`; both thresholds are user parameters.
pub fn concentration_report(
    stats: &CoverStats,
    gap: f64,
    h: f64,
    cv_max: f64,
    gap_tcov_min: f64,
) -> ConcentrationReport {
    let gt = gap * stats.tcov_hat;
    let conc = stats.cv < cv_max && gt > gap_tcov_min;
    ConcentrationReport {
        gap_times_tcov: gt,
        tcov_over_h: stats.tcov_hat / h,
        cv: stats.cv,
        q95_over_q05: stats.quantiles[2] / stats.quantiles[0],
        cv_max,
        gap_tcov_min,
        verdict: String::from(if conc { "concentrating-trend" } else { "non-concentrating" }),
    }
}

/// One row of the torus width sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub gap: f64,
    pub alpha: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub tcov_hat: f64,
    pub tcov_stderr: f64,
    pub cv: f64,
    pub gap_times_tcov: f64,
    #[serde(rename = "tcov_over_H")]
    pub tcov_over_h: f64,
    pub trials: u64,
    #[serde(rename = "t_rel_over_H")]
    pub t_rel_over_h: f64,
    #[serde(rename = "t_mix_inf_over_H")]
    pub t_mix_inf_over_h: f64,
}

impl SweepRow {
    pub fn new(
        n: usize,
        m: usize,
        sd: &SpectralData,
        alpha: f64,
        h: f64,
        t_mix_inf: f64,
        stats: &CoverStats,
    ) -> Self {
        SweepRow {
            n,
            m,
            gap: sd.gap,
            alpha,
            h,
            tcov_hat: stats.tcov_hat,
            tcov_stderr: stats.tcov_stderr,
            cv: stats.cv,
            gap_times_tcov: sd.gap * stats.tcov_hat,
            tcov_over_h: stats.tcov_hat / h,
            trials: stats.trials,
            t_rel_over_h: sd.t_rel / h,
            t_mix_inf_over_h: t_mix_inf / h,
        }
    }

    /// Approximate standard error of the sample CV for `trials` samples.
    pub fn cv_stderr(&self) -> f64 {
        let c = self.cv;
        c * sqrt((1.0 + 2.0 * c * c) / (2.0 * self.trials as f64))
    }
}

/// Gap of the `n x m` torus walk from the product structure:
/// `1 - cos(2 pi / n)` for `m = 1`, otherwise half of that.
pub fn torus_gap_formula(n: usize, m: usize) -> f64 {
    let g = 1.0 - crate::math::cos(2.0 * crate::math::PI / n as f64);
    if m == 1 {
        g
    } else {
        0.5 * g
    }
}

/// Trend checks over sweep rows sorted by `m`: `gap * tcov_hat`
/// non-decreasing and CV non-increasing (one-sided 3 sigma bands), and the
/// relaxation and L-infinity ratios to `H` moving in the same direction.
pub fn sweep_trend_checks(rows: &[SweepRow]) -> Vec<Check> {
    let mut out = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let note = format!("m={} -> m={}", a.m, b.m);
        let sa = a.gap * a.tcov_stderr;
        let sb = b.gap * b.tcov_stderr;
        let band = 3.0 * sqrt(sa * sa + sb * sb);
        out.push(Check::le("sweep_gap_tcov_nondecreasing", a.gap_times_tcov, b.gap_times_tcov + band, 0.0).with_note(note.clone()));
        let (ca, cb) = (a.cv_stderr(), b.cv_stderr());
        let cband = 3.0 * sqrt(ca * ca + cb * cb);
        out.push(Check::le("sweep_cv_nonincreasing", b.cv, a.cv + cband, 0.0).with_note(note.clone()));
        let d1 = b.t_rel_over_h - a.t_rel_over_h;
        let d2 = b.t_mix_inf_over_h - a.t_mix_inf_over_h;
        out.push(Check::ge("sweep_ratio_comovement", d1 * d2, 0.0, 0.0).with_note(note));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Family;
    use crate::math::abs;

    #[test]
    fn alias_tables_reproduce_rows() {
        let spec = ChainSpec::from_family(&Family::RandomReversible { n: 5, seed: 3 }).unwrap();
        let sim = CoverSimulator::new(&spec);
        for x in 0..5 {
            let mut mass = vec![0.0; 5];
            let lo = sim.offsets[x];
            let k = sim.offsets[x + 1] - lo;
            for i in 0..k {
                mass[sim.targets[lo + i] as usize] += sim.prob[lo + i] / k as f64;
                mass[sim.alias[lo + i] as usize] += (1.0 - sim.prob[lo + i]) / k as f64;
            }
            for y in 0..5 {
                assert!(abs(mass[y] - spec.p()[(x, y)]) < 1e-12);
            }
        }
    }

    #[test]
    fn exact_oracle_small_cases() {
        let c3 = ChainSpec::from_family(&Family::Complete { n: 3 }).unwrap();
        for v in exact_cover_times(&c3).unwrap() {
            assert!(abs(v - 3.0) < 1e-12);
        }
        let two = ChainSpec::from_family(&Family::Cycle { n: 2 }).unwrap();
        assert_eq!(exact_cover_times(&two).unwrap(), vec![1.0, 1.0]);
        // cycle(n) from any start: n(n-1)/2
        let c5 = ChainSpec::from_family(&Family::Cycle { n: 5 }).unwrap();
        for v in exact_cover_times(&c5).unwrap() {
            assert!(abs(v - 10.0) < 1e-10);
        }
        let one = ChainSpec::from_family(&Family::Cycle { n: 1 }).unwrap();
        assert_eq!(exact_cover_times(&one).unwrap(), vec![0.0]);
    }

    #[test]
    fn trials_are_reproducible_and_independent_of_order() {
        let spec = ChainSpec::from_family(&Family::Cycle { n: 6 }).unwrap();
        let sim = CoverSimulator::new(&spec);
        let cfg = CoverConfig {
            trials: 20,
            seed: 9,
            ..CoverConfig::default()
        };
        let a = sim.run_trials(&cfg, 2, 0..20, 1e9).unwrap();
        let b: Vec<f64> = (10..20).chain(0..10).map(|k| sim.run_trial(9, 2, k, TimeMode::Continuous, 1e9).unwrap()).collect();
        assert_eq!(&a[10..], &b[..10]);
        assert_eq!(&a[..10], &b[10..]);
        assert!(a.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn runaway_is_reported() {
        let spec = ChainSpec::from_family(&Family::Cycle { n: 30 }).unwrap();
        let sim = CoverSimulator::new(&spec);
        let e = sim.run_trial(1, 0, 0, TimeMode::DiscreteSteps, 3.0).unwrap_err();
        assert!(matches!(e, Error::RunawayTrial { trial: 0, .. }));
    }

    #[test]
    fn mc_matches_oracle_complete_three() {
        let spec = ChainSpec::from_family(&Family::Complete { n: 3 }).unwrap();
        let cfg = CoverConfig {
            trials: 4000,
            seed: 1,
            starts: Starts::Single,
            ..CoverConfig::default()
        };
        let samples = simulate_cover(&spec, &cfg, 2.0).unwrap();
        let stats = CoverStats::from_samples(vec![0], &samples).unwrap();
        assert!(abs(stats.tcov_hat - 3.0) < 3.0 * stats.tcov_stderr);
        assert!(stats.quantiles[0] <= stats.quantiles[1] && stats.quantiles[1] <= stats.quantiles[2]);
    }

    #[test]
    fn matthews_on_complete_three() {
        let spec = ChainSpec::from_family(&Family::Complete { n: 3 }).unwrap();
        let sd = SpectralData::decompose(&spec).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let mb = matthews_bounds(&hd, &sd);
        assert!(abs(mb.upper - 2.0 * (ln(3.0) + 1.0)) < 1e-12);
        assert!(mb.spectral_lower_transitive_vacuous);
        assert_eq!(mb.spectral_lower_transitive, 0.0);
        assert_eq!(mb.lower_set.len(), 3);
        assert!(abs(mb.lower - 2.0 * ln(3.0)) < 1e-12);
    }

    #[test]
    fn m_function_grows_with_b() {
        let small = m_function(1.0, 1.0, 1e-6);
        let big = m_function(1.0, 1e12, 1e-9);
        assert!(big > small && big > 1e3);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert!(abs(quantile(&xs, 0.05) - 1.2) < 1e-12);
    }

    #[test]
    fn torus_gap_formula_matches_spectrum() {
        for (n, m) in [(8, 1), (8, 2), (8, 4), (6, 6)] {
            let spec = ChainSpec::from_family(&Family::GridTorus { n, m }).unwrap();
            let sd = SpectralData::eigenvalues_only(&spec).unwrap();
            assert!(abs(sd.gap - torus_gap_formula(n, m)) < 1e-12, "{n}x{m}");
        }
    }
}
