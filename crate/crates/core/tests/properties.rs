//! Property tests over random reversible chains and small family members.

use covergap_core::cover::{
    exact_cover_times, matthews_bounds, CoverConfig, CoverSimulator, Starts,
};
use covergap_core::hitting::tail_integral_check;
use covergap_core::mixing::{distance, mix_time, worst_case_starts, Norm};
use covergap_core::tails::{induced_chain, killed_chain};
use covergap_core::{ChainSpec, Family, HittingData, SpectralData};
use proptest::prelude::*;

fn random_chain() -> impl Strategy<Value = ChainSpec> {
    (2usize..24, any::<u64>()).prop_map(|(n, seed)| {
        ChainSpec::from_family(&Family::RandomReversible { n, seed }).unwrap()
    })
}

fn small_family() -> impl Strategy<Value = ChainSpec> {
    prop_oneof![
        (3usize..24).prop_map(|n| Family::Cycle { n }),
        (2usize..6, 1usize..6).prop_map(|(n, m)| Family::GridTorus { n: n.max(m), m: m.min(n.max(m)) }),
        (1usize..5).prop_map(|d| Family::Hypercube { d }),
        (2usize..12).prop_map(|n| Family::Complete { n }),
        (0.05f64..0.95, 0.05f64..0.95).prop_map(|(p, q)| Family::TwoState { p, q }),
    ]
    .prop_map(|f| ChainSpec::from_family(&f).unwrap())
}

fn any_chain() -> impl Strategy<Value = ChainSpec> {
    prop_oneof![random_chain(), small_family()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn built_chains_validate(spec in any_chain()) {
        prop_assert!(spec.validate().passed);
        let again = ChainSpec::from_family(spec.family().unwrap()).unwrap();
        prop_assert_eq!(again, spec);
    }

    #[test]
    fn eigentime_and_fundamental_matrix_identities(spec in any_chain()) {
        let sd = SpectralData::eigenvalues_only(&spec).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let tol = 1e-8 * hd.alpha;
        prop_assert!((sd.eigentime_alpha() - hd.alpha).abs() < tol);
        prop_assert!(hd.z_identity_deviation() < tol);
        prop_assert!(hd.alpha_x_deviation() < tol);
    }

    #[test]
    fn transitive_families_have_symmetric_hitting(spec in small_family()) {
        let hd = HittingData::compute(&spec).unwrap();
        if spec.is_transitive_hint() {
            prop_assert!(hd.asymmetry() < 1e-9 * hd.h.max(1.0));
            let r = hd.ratio();
            prop_assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn heat_semigroup(spec in any_chain(), s in 0.0f64..5.0, t in 0.0f64..5.0) {
        let sd = SpectralData::decompose(&spec).unwrap();
        let prod = sd.heat_kernel(s).matmul(&sd.heat_kernel(t));
        prop_assert!(prod.max_abs_diff(&sd.heat_kernel(s + t)) < 1e-9);
        let k = sd.heat_kernel(t);
        for x in 0..spec.n() {
            let row: f64 = k.row(x).iter().sum();
            prop_assert!((row - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn poincare_decay_of_return_probability(spec in any_chain(), s in 0.0f64..4.0, t in 0.0f64..4.0, xi in any::<prop::sample::Index>()) {
        let sd = SpectralData::decompose(&spec).unwrap();
        let x = xi.index(spec.n());
        let pi = spec.pi()[x];
        let lhs = sd.heat(x, x, t + s) - pi;
        let rhs = (-s / sd.t_rel).exp() * (sd.heat(x, x, t) - pi);
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn distances_non_increasing(spec in any_chain()) {
        let sd = SpectralData::decompose(&spec).unwrap();
        let grid: Vec<f64> = (0..40).map(|k| k as f64 * 0.1 * sd.t_rel).collect();
        for w in grid.windows(2) {
            prop_assert!(sd.d_inf(w[1]) <= sd.d_inf(w[0]) + 1e-12);
            for x in 0..spec.n() {
                prop_assert!(sd.d2x_squared(x, w[1]) <= sd.d2x_squared(x, w[0]) + 1e-12);
            }
        }
    }

    #[test]
    fn bisection_agrees_with_grid_scan(n in 2usize..16, seed in any::<u64>(), eps in 0.05f64..0.9) {
        let spec = ChainSpec::from_family(&Family::RandomReversible { n, seed }).unwrap();
        let sd = SpectralData::decompose(&spec).unwrap();
        let starts = worst_case_starts(&spec);
        let step = sd.t_rel / 1000.0;
        for norm in [Norm::Tv, Norm::L2, Norm::Inf] {
            let t = mix_time(&spec, &sd, norm, eps);
            let mut k = 0u32;
            while distance(&sd, norm, &starts, k as f64 * step) > eps {
                k += 1;
            }
            let scan = k as f64 * step;
            prop_assert!(t <= scan + 1e-9 * sd.t_rel && t >= scan - step - 1e-9 * sd.t_rel, "{norm:?}: {t} vs scan {scan}");
        }
    }

    #[test]
    fn tail_integral_bound(spec in any_chain(), s in 0.0f64..10.0, xi in any::<prop::sample::Index>(), yi in any::<prop::sample::Index>()) {
        let sd = SpectralData::decompose(&spec).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let c = tail_integral_check(&sd, &hd, xi.index(spec.n()), yi.index(spec.n()), s);
        prop_assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn paley_zygmund_set_is_heavy(spec in any_chain()) {
        let hd = HittingData::compute(&spec).unwrap();
        let (_, c) = hd.paley_zygmund_set();
        prop_assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn killed_chain_tails(spec in random_chain(), ai in any::<prop::sample::Index>()) {
        let a = ai.index(spec.n());
        let kc = killed_chain(&spec, &[a]).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let mut prev = 1.0 + 1e-12;
        for k in 0..30 {
            let t = k as f64 * 0.5;
            let v = kc.tail(spec.pi(), t);
            prop_assert!(v <= prev + 1e-12 && v >= -1e-12);
            prev = v;
        }
        for y in 0..spec.n() {
            let mut delta = vec![0.0; spec.n()];
            delta[y] = 1.0;
            prop_assert!((kc.expected_hit(&delta) - hd.et[(y, a)]).abs() < 1e-8 * hd.h);
        }
        let mu = kc.mu_a.clone();
        for t in [0.0, 0.7, 3.0] {
            prop_assert!((kc.tail(&mu, t) - (-kc.lambda_a * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn induced_chain_is_stochastic(spec in random_chain(), mask in any::<u32>()) {
        let n = spec.n();
        let mut a: Vec<usize> = (0..n).filter(|&x| mask >> (x % 32) & 1 == 1).collect();
        if a.is_empty() {
            a.push(0);
        }
        let ic = induced_chain(&spec, &a).unwrap();
        prop_assert!(ic.row_sum_deviation() < 1e-10);
        prop_assert!(ic.stationarity_residual() < 1e-10);
    }

    #[test]
    fn cover_trials_are_reproducible(spec in random_chain(), seed in any::<u64>()) {
        let sim = CoverSimulator::new(&spec);
        let cfg = CoverConfig { trials: 20, seed, starts: Starts::Single, ..CoverConfig::default() };
        let whole = sim.run_trials(&cfg, 0, 0..20, f64::INFINITY).unwrap();
        let mut split = sim.run_trials(&cfg, 0, 0..7, f64::INFINITY).unwrap();
        split.extend(sim.run_trials(&cfg, 0, 7..20, f64::INFINITY).unwrap());
        prop_assert_eq!(whole, split);
    }

    #[test]
    fn exact_cover_inside_matthews_sandwich(n in 2usize..8, seed in any::<u64>()) {
        let spec = ChainSpec::from_family(&Family::RandomReversible { n, seed }).unwrap();
        let sd = SpectralData::eigenvalues_only(&spec).unwrap();
        let hd = HittingData::compute(&spec).unwrap();
        let mb = matthews_bounds(&hd, &sd);
        let exact = exact_cover_times(&spec).unwrap();
        let tcov = exact.iter().copied().fold(0.0, f64::max);
        let min = exact.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(mb.lower <= tcov * (1.0 + 1e-10));
        prop_assert!(tcov <= mb.upper * (1.0 + 1e-10));
        prop_assert!(hd.h <= tcov * (1.0 + 1e-10));
        prop_assert!(tcov <= min + hd.h + 1e-9 * tcov);
        prop_assert!(mb.spectral_lower_general <= tcov);
    }
}
