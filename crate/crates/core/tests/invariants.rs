use fragmenta::discrete::{reverse_matrix, simulate_discrete, solve_ht_recurrence, DiscreteParams};
use fragmenta::empirics::{martingale_increments, EmpiricalCdf};
use fragmenta::engine::{track_y_interval, xi_grid_point, XI_GRID};
use fragmenta::stationary::StationarySolution;
use fragmenta::{run_to_cutoff, SplitLaw};
use proptest::prelude::*;

fn continuous_law() -> impl Strategy<Value = SplitLaw> {
    prop_oneof![
        Just(SplitLaw::Kakutani),
        (2u32..6).prop_map(|b| SplitLaw::b_uniform(b).unwrap()),
        Just(SplitLaw::custom(vec![1.0, 6.0, -6.0], 2).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expected_count_is_a_cdf_of_b_children(b in 2u32..10, xs in prop::collection::vec(0.0f64..=1.0, 2..20)) {
        let law = SplitLaw::b_uniform(b).unwrap();
        prop_assert_eq!(law.expected_count(0.0).unwrap(), 0.0);
        prop_assert!((law.expected_count(1.0).unwrap() - b as f64).abs() < 1e-12);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let vals: Vec<f64> = xs.iter().map(|&x| law.expected_count(x).unwrap()).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn run_conserves_length_and_respects_cutoff(law in continuous_law(), x_c in 0.005f64..0.3, seed in any::<u64>()) {
        let r = run_to_cutoff(&law, x_c, seed).unwrap();
        let total: f64 = r.spacing_lengths().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(r.spacings.iter().all(|s| s.length > 0.0 && s.length <= x_c));
        prop_assert_eq!(r.partition_points.len() as u64, (law.children() as u64 - 1) * r.n_steps);
        prop_assert!(r.maxima_trajectory.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(r.spacings.windows(2).all(|w| (w[0].right() - w[1].left).abs() < 1e-12));
    }

    #[test]
    fn run_is_deterministic(law in continuous_law(), x_c in 0.01f64..0.3, seed in any::<u64>()) {
        let a = run_to_cutoff(&law, x_c, seed).unwrap();
        let b = run_to_cutoff(&law, x_c, seed).unwrap();
        prop_assert_eq!(a.spacings, b.spacings);
        prop_assert_eq!(a.xi_counts, b.xi_counts);
    }

    #[test]
    fn xi_at_cutoff_counts_every_spacing(law in continuous_law(), x_c in 0.005f64..0.3, seed in any::<u64>()) {
        let r = run_to_cutoff(&law, x_c, seed).unwrap();
        let frozen: u64 = r.xi_counts.iter().map(|c| c[XI_GRID - 1] as u64).sum();
        prop_assert_eq!(frozen, r.spacings.len() as u64);
        for counts in &r.xi_counts {
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn martingale_increments_are_bounded(law in continuous_law(), j in 0usize..XI_GRID, seed in any::<u64>()) {
        let x_c = 0.01;
        let r = run_to_cutoff(&law, x_c, seed).unwrap();
        let s = martingale_increments(&r, &law, xi_grid_point(x_c, j)).unwrap();
        prop_assert!(s.increments.iter().all(|x| x.abs() <= s.bound_c));
        let mut acc = 0.0;
        for (x, p) in s.increments.iter().zip(&s.partial_sums) {
            acc += x;
            prop_assert!((acc - p).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_cdf_is_a_right_continuous_step_function(samples in prop::collection::vec(-5.0f64..5.0, 1..60), probes in prop::collection::vec(-6.0f64..6.0, 1..30)) {
        let cdf = EmpiricalCdf::new(samples.clone()).unwrap();
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(cdf.eval(lo - 1e-9), 0.0);
        prop_assert_eq!(cdf.eval(hi), 1.0);
        for &s in &samples {
            let at = samples.iter().filter(|&&v| v <= s).count() as f64 / samples.len() as f64;
            prop_assert_eq!(cdf.eval(s), at);
        }
        let mut probes = probes;
        probes.sort_by(f64::total_cmp);
        prop_assert!(probes.windows(2).all(|w| cdf.eval(w[0]) <= cdf.eval(w[1])));
    }

    #[test]
    fn y_track_ratios_multiply_to_final_length(y in 0.01f64..0.99, x_c in 1e-4f64..0.1, seed in any::<u64>()) {
        let t = track_y_interval(&SplitLaw::Kakutani, y, x_c, seed).unwrap();
        prop_assert!(t.ratios.iter().all(|&r| r > 0.0 && r <= 1.0));
        prop_assert_eq!(t.ratios.len(), t.n_cuts);
        prop_assert!((t.total_shrinkage() - t.final_length).abs() <= 1e-12);
        prop_assert!(t.final_length <= x_c);
    }

    #[test]
    fn discrete_mass_is_conserved(n in 2u64..20_000, frac in 0.0f64..1.0, alpha in 1.1f64..1.9, seed in any::<u64>()) {
        let stop = 1 + ((n - 2) as f64 * frac) as u64;
        let law = SplitLaw::heavy_tail(alpha).unwrap();
        let marks = [n / 2, n / 4, n / 16, 3];
        let params = DiscreteParams { n, stop_size: stop, stop_at_critical: false };
        let out = simulate_discrete(&law, params, &marks, seed).unwrap();
        prop_assert_eq!(out.last.total_mass(), n as u128);
        prop_assert!(out.last.white_size() <= stop);
        for snap in &out.snapshots {
            prop_assert_eq!(snap.profile.total_mass(), n as u128);
            prop_assert!(snap.profile.white_size() <= snap.milestone);
        }
    }

    #[test]
    fn catalan_fringe_conserves_mass(n in 2u64..3_000, seed in any::<u64>()) {
        let params = DiscreteParams { n, stop_size: 1, stop_at_critical: false };
        let out = simulate_discrete(&SplitLaw::CatalanFringe, params, &[], seed).unwrap();
        prop_assert_eq!(out.last.count(1), n);
    }

    #[test]
    fn ht_lies_in_unit_interval(alpha in 1.05f64..1.95, horizon in 1usize..3_000) {
        let s = solve_ht_recurrence(alpha, horizon).unwrap();
        prop_assert_eq!(s.h[0], 1.0);
        prop_assert!(s.h.iter().all(|&h| h > 0.0 && h <= 1.0));
    }

    #[test]
    fn split_pmf_windows_never_exceed_one(alpha in 1.05f64..1.95, s in 2u64..500, lo in 0usize..250, len in 1usize..250) {
        let p = SplitLaw::heavy_tail(alpha).unwrap().split_pmf(s).unwrap();
        let lo = lo.min(p.len() - 1);
        let hi = (lo + len).min(p.len());
        let window: f64 = p[lo..hi].iter().sum();
        prop_assert!(window <= 1.0 + 1e-12);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reverse_matrix_structure(k in 2usize..40, alpha in 1.05f64..1.95) {
        let p = SplitLaw::heavy_tail(alpha).unwrap().split_pmf(k as u64).unwrap();
        for i in 0..p.len() {
            prop_assert!((p[i] - p[p.len() - 1 - i]).abs() <= 1e-15);
        }
        let a = reverse_matrix(&p, k);
        for (c, v) in a[k - 1].iter().enumerate() {
            prop_assert_eq!(*v, (c + 1) as f64);
        }
        for r in 0..k - 1 {
            prop_assert_eq!(a[r][r], 1.0);
            for c in 0..r {
                prop_assert_eq!(a[r][c], 0.0);
            }
            for c in r + 1..k {
                prop_assert_eq!(a[r][c], p[c - r - 1]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn stationary_cdf_is_monotone_from_zero_to_one(b in 2u32..7) {
        let sol = StationarySolution::solve(&SplitLaw::b_uniform(b).unwrap()).unwrap();
        let table = sol.tabulate(64).unwrap();
        prop_assert!(table[0].u > 0.0);
        prop_assert!(table.windows(2).all(|w| w[0].u <= w[1].u));
        prop_assert!((table[63].u - 1.0).abs() < 1e-10);
        prop_assert!(sol.cdf(1e-9).unwrap() < 1e-6);
    }
}
