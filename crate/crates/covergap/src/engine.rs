//! Report builders behind each subcommand. Monte Carlo trials run on a
//! rayon pool; results are gathered in task order so the output does not
//! depend on the worker count.

use std::ops::Range;

use covergap_core::cover::{
    concentration_report, cover_bound_checks, matthews_bounds, runaway_limit, sweep_trend_checks,
    torus_gap_formula, ConcentrationReport, CoverConfig, CoverSimulator, CoverStats, MatthewsBounds,
    Starts, SweepRow, DEFAULT_CV_MAX, DEFAULT_GAP_TCOV_MIN,
};
use covergap_core::hitting::TransitiveSummary;
use covergap_core::mixing::{mix_time_inf_transitive, MixingProfile};
use covergap_core::verify::{verify_chain, VerifyConfig, VerifyReport};
use covergap_core::{Check, ChainSpec, Diagnostics, Error, Family, HittingData, SpectralData};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::InputError;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "COVERGAP_THREADS";

/// Trials per parallel task.
const CHUNK: u64 = 512;

/// Largest `n * m` accepted by the sweep.
pub const SWEEP_MAX_STATES: usize = 8192;

/// `eps` used for the L-infinity mixing column of the sweep.
pub const SWEEP_INF_EPS: f64 = 0.25;

/// Pool sized from `COVERGAP_THREADS` (default: all cores).
pub fn thread_pool() -> Result<ThreadPool, InputError> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(s) => {
            let k: usize = s
                .trim()
                .parse()
                .map_err(|_| InputError(format!("{THREADS_VAR}={s:?} is not a thread count")))?;
            if k == 0 {
                return Err(InputError(format!("{THREADS_VAR} must be at least 1")));
            }
            k
        }
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| InputError(format!("cannot start worker pool: {e}")))
}

/// Cover-time samples for every configured start, `samples[k][trial]`.
/// Identical to the sequential driver for any pool size.
pub fn simulate_cover_parallel(
    pool: &ThreadPool,
    spec: &ChainSpec,
    cfg: &CoverConfig,
    h: f64,
) -> Result<(Vec<usize>, Vec<Vec<f64>>), Error> {
    cfg.validate()?;
    let starts = cfg.starts.resolve(spec.n())?;
    let sim = CoverSimulator::new(spec);
    let limit = runaway_limit(cfg, h, spec.n());
    let tasks: Vec<(usize, Range<u64>)> = (0..starts.len())
        .flat_map(|k| {
            (0..cfg.trials.div_ceil(CHUNK)).map(move |c| (k, c * CHUNK..((c + 1) * CHUNK).min(cfg.trials)))
        })
        .collect();
    let chunks: Vec<Result<Vec<f64>, Error>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(k, r)| sim.run_trials(cfg, starts[*k], r.clone(), limit))
            .collect()
    });
    let mut samples = vec![Vec::with_capacity(cfg.trials as usize); starts.len()];
    for ((k, _), chunk) in tasks.iter().zip(chunks) {
        samples[*k].extend(chunk?);
    }
    Ok((starts, samples))
}

pub fn cover_stats(pool: &ThreadPool, spec: &ChainSpec, cfg: &CoverConfig, h: f64) -> Result<CoverStats, Error> {
    let (starts, samples) = simulate_cover_parallel(pool, spec, cfg, h)?;
    CoverStats::from_samples(starts, &samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub n: usize,
    pub family: Option<Family>,
    pub reversible: bool,
    pub transitive_hint: bool,
}

impl ChainSummary {
    pub fn of(spec: &ChainSpec) -> Self {
        ChainSummary {
            n: spec.n(),
            family: spec.family().cloned(),
            reversible: spec.is_reversible(),
            transitive_hint: spec.is_transitive_hint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSummary {
    /// `sum_{i>=2} 1/lambda_i`.
    pub alpha_spectral: f64,
    /// `sum_{x,y} pi(x) pi(y) E_x[T_y]`.
    pub alpha_hitting: f64,
    pub alpha_relative_difference: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_over_alpha")]
    pub ratio: f64,
    pub pi_star: f64,
    pub alpha_x_min: f64,
    pub alpha_x_argmin: usize,
    pub alpha_x_max: f64,
    pub alpha_x_argmax: usize,
}

/// Relative tolerance for the two routes to `alpha`.
pub const ALPHA_AGREEMENT_TOL: f64 = 1e-8;

impl HittingSummary {
    /// Fails with [`Error::HittingMismatch`] when the routes disagree.
    pub fn new(sd: &SpectralData, hd: &HittingData) -> Result<Self, Error> {
        let a_s = sd.eigentime_alpha();
        let rel = (a_s - hd.alpha).abs() / hd.alpha.abs().max(f64::MIN_POSITIVE);
        if !(rel <= ALPHA_AGREEMENT_TOL) {
            return Err(Error::HittingMismatch(format!(
                "spectral alpha {a_s:e} vs hitting alpha {:e}",
                hd.alpha
            )));
        }
        let argmin = (0..hd.n()).min_by(|&a, &b| hd.alpha_x[a].total_cmp(&hd.alpha_x[b])).unwrap_or(0);
        let argmax = (0..hd.n()).max_by(|&a, &b| hd.alpha_x[a].total_cmp(&hd.alpha_x[b]).then(b.cmp(&a))).unwrap_or(0);
        Ok(HittingSummary {
            alpha_spectral: a_s,
            alpha_hitting: hd.alpha,
            alpha_relative_difference: rel,
            h: hd.h,
            ratio: hd.ratio(),
            pi_star: hd.pi_star,
            alpha_x_min: hd.alpha_x[argmin],
            alpha_x_argmin: argmin,
            alpha_x_max: hd.alpha_x[argmax],
            alpha_x_argmax: argmax,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub t_rel: f64,
    /// Row `i` holds `f_i = phi_i / sqrt(pi)`; present only on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenfunctions: Option<Vec<Vec<f64>>>,
}

impl SpectralSummary {
    pub fn new(sd: &SpectralData, with_vectors: bool) -> Self {
        let n = sd.n();
        SpectralSummary {
            eigenvalues: sd.lambdas.clone(),
            gap: sd.gap,
            t_rel: sd.t_rel,
            eigenfunctions: (with_vectors && sd.has_vectors())
                .then(|| (0..n).map(|i| (0..n).map(|x| sd.f(i, x)).collect()).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub chain: ChainSummary,
    pub diagnostics: Diagnostics,
    pub spectral: SpectralSummary,
    pub hitting: HittingSummary,
    pub mixing: MixingProfile,
    pub matthews: MatthewsBounds,
}

/// Everything computable without simulation, plus the full hitting data
/// for CSV export.
pub fn analyze(spec: &ChainSpec, eps_grid: &[f64], with_vectors: bool) -> Result<(AnalyzeReport, HittingData), Error> {
    spec.require_reversible()?;
    let sd = SpectralData::decompose(spec)?;
    let hd = HittingData::compute(spec)?;
    let hitting = HittingSummary::new(&sd, &hd)?;
    let report = AnalyzeReport {
        chain: ChainSummary::of(spec),
        diagnostics: spec.validate_with_hitting(&hd),
        spectral: SpectralSummary::new(&sd, with_vectors),
        hitting,
        mixing: MixingProfile::compute(spec, &sd, 0, eps_grid)?,
        matthews: matthews_bounds(&hd, &sd),
    };
    Ok((report, hd))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub chain: ChainSummary,
    pub config: CoverConfig,
    pub gap: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub stats: CoverStats,
    pub matthews: MatthewsBounds,
    pub concentration: ConcentrationReport,
    pub checks: Vec<Check>,
}

impl CoverReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

pub fn cover(pool: &ThreadPool, spec: &ChainSpec, cfg: &CoverConfig) -> Result<CoverReport, Error> {
    spec.require_reversible()?;
    let sd = SpectralData::eigenvalues_only(spec)?;
    let hd = HittingData::compute(spec)?;
    let stats = cover_stats(pool, spec, cfg, hd.h)?;
    let mb = matthews_bounds(&hd, &sd);
    let transitive = spec.is_transitive_hint();
    let mut checks = cover_bound_checks(&stats, &mb, hd.h, transitive);
    if transitive {
        checks.push(stats.start_invariance_check());
    }
    Ok(CoverReport {
        chain: ChainSummary::of(spec),
        config: cfg.clone(),
        gap: sd.gap,
        h: hd.h,
        concentration: concentration_report(&stats, sd.gap, hd.h, DEFAULT_CV_MAX, DEFAULT_GAP_TCOV_MIN),
        stats,
        matthews: mb,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `1 - cos(2 pi / n)`, halved for `m > 1`, per row.
    pub gap_formula: Vec<f64>,
    pub checks: Vec<Check>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "n", "m", "gap", "alpha", "H", "tcov_hat", "tcov_stderr", "cv", "gap_times_tcov", "tcov_over_H",
    ];

    pub fn to_csv(&self) -> String {
        use crate::canonical::{float, Csv};
        let mut csv = Csv::new(&Self::CSV_HEADER);
        for r in &self.rows {
            csv.row(&[
                r.n.to_string(),
                r.m.to_string(),
                float(r.gap),
                float(r.alpha),
                float(r.h),
                float(r.tcov_hat),
                float(r.tcov_stderr),
                float(r.cv),
                float(r.gap_times_tcov),
                float(r.tcov_over_h),
            ]);
        }
        csv.finish()
    }
}

/// Torus sweep over widths `m_list` (sorted, deduplicated) at height `n`.
/// Uses eigenvalues only and one absorbed solve per width, and a single
/// start per torus.
pub fn sweep(pool: &ThreadPool, n: usize, m_list: &[usize], cfg: &CoverConfig) -> Result<SweepReport, Error> {
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() {
        return Err(Error::BadParams("empty width list".into()));
    }
    let mut rows = Vec::with_capacity(ms.len());
    let mut formula = Vec::with_capacity(ms.len());
    for &m in &ms {
        if m == 0 || m > n {
            return Err(Error::BadParams(format!("width {m} must lie in 1..={n}")));
        }
        if n.saturating_mul(m) > SWEEP_MAX_STATES {
            return Err(Error::BadParams(format!("{n}x{m} exceeds {SWEEP_MAX_STATES} states")));
        }
        let spec = ChainSpec::from_family(&Family::GridTorus { n, m })?;
        let sd = SpectralData::eigenvalues_only(&spec)?;
        let ts = TransitiveSummary::compute(&spec)?;
        let t_inf = mix_time_inf_transitive(&sd, SWEEP_INF_EPS);
        let single = CoverConfig {
            starts: Starts::Single,
            ..cfg.clone()
        };
        let stats = cover_stats(pool, &spec, &single, ts.h)?;
        rows.push(SweepRow::new(n, m, &sd, ts.alpha, ts.h, t_inf, &stats));
        formula.push(torus_gap_formula(n, m));
    }
    let checks = sweep_trend_checks(&rows);
    Ok(SweepReport {
        rows,
        gap_formula: formula,
        checks,
    })
}

/// Verification with a Monte Carlo cover estimate (`trials > 0`) or
/// without one. Transitive chains are simulated from state 0 only.
pub fn verify(pool: &ThreadPool, spec: &ChainSpec, vcfg: &VerifyConfig, ccfg: Option<&CoverConfig>) -> Result<VerifyReport, Error> {
    spec.require_reversible()?;
    let stats = match ccfg {
        Some(c) => {
            let mut c = c.clone();
            if spec.is_transitive_hint() && c.starts == Starts::All {
                c.starts = Starts::Single;
            }
            let h = if spec.is_transitive_hint() {
                TransitiveSummary::compute(spec)?.h
            } else {
                HittingData::compute(spec)?.h
            };
            Some(cover_stats(pool, spec, &c, h)?)
        }
        None => None,
    };
    verify_chain(spec, vcfg, stats.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use covergap_core::cover::simulate_cover;

    fn pool(k: usize) -> ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap()
    }

    #[test]
    fn parallel_matches_sequential() {
        let spec = ChainSpec::from_family(&Family::RandomReversible { n: 6, seed: 2 }).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let cfg = CoverConfig {
            trials: 1100,
            seed: 7,
            ..CoverConfig::default()
        };
        let seq = simulate_cover(&spec, &cfg, hd.h).unwrap();
        for k in [1, 3] {
            let (_, par) = simulate_cover_parallel(&pool(k), &spec, &cfg, hd.h).unwrap();
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn analyze_two_state() {
        let spec = ChainSpec::from_family(&Family::TwoState { p: 0.5, q: 0.5 }).unwrap();
        let (r, _) = analyze(&spec, &[0.5], false).unwrap();
        assert!((r.spectral.gap - 1.0).abs() < 1e-12);
        assert!((r.hitting.alpha_hitting - 1.0).abs() < 1e-12);
        assert!((r.hitting.h - 2.0).abs() < 1e-12);
        assert!((r.mixing.t_mix_2[0] - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_oversized() {
        let cfg = CoverConfig::default();
        assert!(sweep(&pool(1), 128, &[128], &cfg).is_err());
        assert!(sweep(&pool(1), 8, &[9], &cfg).is_err());
    }
}
