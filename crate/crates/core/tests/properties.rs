use proptest::prelude::*;

use subexp::asymptotics::{h_curve_mc, mrv_ruin_constant};
use subexp::claims::{AngularMeasure, ClaimModel, OneDimLaw};
use subexp::diagnostics::{empirical_fa, scalarized_sample};
use subexp::rng::RngStream;
use subexp::ruinsets::{compile_bidask, BidAskSpec, HyperplaneFamily, LinearMapSpec};
use subexp::simulator::{simulate_ruin_grid, Horizon, Interarrival, RiskConfig, Solvency};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// A dimension, a valid direction family in it and two points.
fn family_and_points() -> impl Strategy<Value = (HyperplaneFamily, Vec<f64>, Vec<f64>)> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(d, k)| {
        let dir = prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..3.0], d)
            .prop_map(|mut p| {
                if p.iter().all(|&v| v == 0.0) {
                    p[0] = 1.0;
                }
                p
            });
        (
            prop::collection::vec(dir, k),
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(-5.0f64..5.0, d),
        )
            .prop_map(move |(dirs, x, y)| (HyperplaneFamily::new(d, dirs).unwrap(), x, y))
    })
}

/// Bid-ask matrix closed under `π_ij ≤ π_ik π_kj`, with a point of the simplex.
fn bidask_spec(d: usize) -> impl Strategy<Value = BidAskSpec> {
    (prop::collection::vec(0.0f64..1.5, d * d), prop::collection::vec(0.1f64..1.0, d)).prop_map(move |(s, b)| {
        let mut pi: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 1.0 + s[i * d + j] }).collect()).collect();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    pi[i][j] = pi[i][j].min(pi[i][k] * pi[k][j]);
                }
            }
        }
        let total: f64 = b.iter().sum();
        BidAskSpec::new(pi, b.iter().map(|v| v / total).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn index_is_positive_homogeneous((f, x, _) in family_and_points(), lam in 0.01f64..100.0) {
        let lx: Vec<f64> = x.iter().map(|v| lam * v).collect();
        prop_assert!(near(f.scale_index(&lx).unwrap(), lam * f.scale_index(&x).unwrap()));
    }

    #[test]
    fn index_is_monotone((f, x, y) in family_and_points()) {
        let up: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b.abs()).collect();
        prop_assert!(f.scale_index(&up).unwrap() >= f.scale_index(&x).unwrap());
    }

    #[test]
    fn level_sets_are_nested((f, x, _) in family_and_points(), u in 0.01f64..5.0, t in 1.0f64..4.0) {
        if f.contains(&x, t * u).unwrap() {
            prop_assert!(f.contains(&x, u).unwrap());
        }
    }

    #[test]
    fn membership_is_strict((f, x, _) in family_and_points()) {
        let y = f.scale_index(&x).unwrap();
        if y > 0.0 {
            prop_assert!(!f.contains(&x, y).unwrap());
        }
    }

    #[test]
    fn height_inverts_index((f, _, _) in family_and_points(), w in prop::collection::vec(0.01f64..1.0, 4)) {
        let d = f.dim();
        let s: f64 = w[..d].iter().sum();
        let theta: Vec<f64> = w[..d].iter().map(|v| v / s).collect();
        let y = f.scale_index(&theta).unwrap();
        let h = f.height(&theta).unwrap();
        if y > 0.0 {
            prop_assert!(near(h * y, 1.0));
        } else {
            prop_assert!(h.is_infinite());
        }
    }

    #[test]
    fn complement_is_convex((f, x, y) in family_and_points(), u in 0.1f64..5.0, t in 0.0f64..=1.0) {
        if !f.contains(&x, u).unwrap() && !f.contains(&y, u).unwrap() {
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            prop_assert!(f.scale_index(&z).unwrap() <= u * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pullback_commutes_with_maps(
        (f, x, _) in family_and_points(),
        rows in prop::collection::vec(prop::collection::vec(0.0f64..2.0, 4), 1..=4),
    ) {
        let g_dim = rows.len();
        let d = f.dim();
        let t: Vec<Vec<f64>> = rows.iter().map(|r| r[..d].to_vec()).collect();
        let map = LinearMapSpec::new(t.clone()).unwrap();
        let g = HyperplaneFamily::new(g_dim, vec![vec![1.0; g_dim]]).unwrap();
        let tx: Vec<f64> = t.iter().map(|r| dot(r, &x)).collect();
        if let Ok(pulled) = g.pullback(&map) {
            prop_assert!(near(pulled.scale_index(&x).unwrap(), g.scale_index(&tx).unwrap()));
        }
    }

    #[test]
    fn pruning_keeps_membership((f, x, _) in family_and_points(), u in 0.1f64..5.0) {
        let p = f.pruned().unwrap();
        prop_assert!(p.directions().len() <= f.directions().len());
        let (a, b) = (f.scale_index(&x).unwrap(), p.scale_index(&x).unwrap());
        if (a - u).abs() > 1e-9 {
            prop_assert_eq!(f.contains(&x, u).unwrap(), p.contains(&x, u).unwrap());
        }
        prop_assert!(b <= a + 1e-9);
    }

    #[test]
    fn scaling_the_family_scales_the_set((f, x, _) in family_and_points(), k in -3i32..=3, u in 0.1f64..5.0) {
        let lam = 2f64.powi(k);
        let g = f.scaled(lam).unwrap();
        prop_assert_eq!(g.contains(&x, u).unwrap(), f.contains(&x, lam * u).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bidask_compilation_matches_cone(
        spec in prop_oneof![bidask_spec(2), bidask_spec(3)],
        pts in prop::collection::vec(prop::collection::vec(-1.5f64..2.0, 3), 20),
        u in 0.2f64..3.0,
    ) {
        let d = spec.dim();
        let f = compile_bidask(&spec).unwrap();
        for x in &pts {
            let x = &x[..d];
            if (f.scale_index(x).unwrap() - u).abs() <= 1e-9 {
                continue;
            }
            let z: Vec<f64> = spec.b().iter().zip(x).map(|(b, v)| u * b - v).collect();
            prop_assert_eq!(f.contains(x, u).unwrap(), !spec.cone_contains(&z).unwrap());
        }
    }

    #[test]
    fn survival_and_quantile_agree(
        law in prop_oneof![
            (1.1f64..4.0, 0.5f64..2.0).prop_map(|(a, s)| OneDimLaw::pareto(a, s)),
            (0.2f64..3.0).prop_map(OneDimLaw::exponential),
            (0.3f64..2.0, 0.5f64..2.0).prop_map(|(k, s)| OneDimLaw::Weibull { shape: k, scale: s }),
            (-1.0f64..1.0, 0.2f64..1.5).prop_map(|(m, s)| OneDimLaw::Lognormal { mu: m, sigma: s }),
        ],
        q in 0.001f64..0.999,
        t in 0.0f64..50.0,
        dt in 0.0f64..5.0,
    ) {
        prop_assert!(law.survival(t + dt) <= law.survival(t));
        prop_assert!((0.0..=1.0).contains(&law.survival(t)));
        let x = law.quantile(q);
        prop_assert!((law.cdf(x) - q).abs() < 1e-7, "cdf(quantile({})) = {}", q, law.cdf(x));
    }

    #[test]
    fn streams_reproduce(seed in any::<u64>(), idx in 0u64..1000) {
        let model = ClaimModel::independent(vec![OneDimLaw::pareto(1.5, 1.0), OneDimLaw::exponential(1.0)]).unwrap();
        let a = model.sample(RngStream::new(seed, idx), 16).unwrap();
        let b = model.sample(RngStream::new(seed, idx), 16).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().flatten().all(|&v| v >= 0.0));
        prop_assert_ne!(a, model.sample(RngStream::new(seed, idx + 1), 16).unwrap());
    }

    #[test]
    fn empirical_fa_counts_the_scalarized_sample(seed in any::<u64>(), u in 0.5f64..20.0) {
        let model = ClaimModel::independent(vec![OneDimLaw::pareto(1.5, 1.0), OneDimLaw::pareto(2.5, 1.0)]).unwrap();
        let set = HyperplaneFamily::union(&[1.0, 2.0]).unwrap();
        let n = 2000;
        let curve = empirical_fa(&model, &set, &[u], n, RngStream::new(seed, 0)).unwrap();
        let ys = scalarized_sample(&model, &set, n, RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(curve.points[0].hits, Some(ys.iter().filter(|&&y| y > u).count() as u64));
    }

    #[test]
    fn h_shifts_with_family_scale(seed in any::<u64>(), k in -2i32..=2) {
        let lam = 2f64.powi(k);
        let model = ClaimModel::independent(vec![OneDimLaw::pareto(2.0, 1.0), OneDimLaw::exponential(1.0)]).unwrap();
        let set = HyperplaneFamily::aggregate(&[1.0, 2.0]).unwrap();
        let c = [0.5, 1.0];
        let levels = [1.0, 4.0, 16.0];
        let shifted: Vec<f64> = levels.iter().map(|u| lam * u).collect();
        let a = h_curve_mc(&model, &set.scaled(lam).unwrap(), &c, &levels, 4000, RngStream::new(seed, 1)).unwrap();
        let b = h_curve_mc(&model, &set, &c, &shifted, 4000, RngStream::new(seed, 1)).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert!(near(p.estimate, q.estimate), "{} vs {}", p.estimate, q.estimate);
        }
        prop_assert!(a.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn mrv_constant_decreases_in_drift(c1 in 0.1f64..3.0, c2 in 0.1f64..3.0, bump in 0.01f64..2.0, alpha in 1.2f64..4.0) {
        let model = ClaimModel::polar(
            AngularMeasure::atoms(vec![(vec![0.3, 0.7], 0.6), (vec![0.9, 0.1], 0.4)]).unwrap(),
            OneDimLaw::pareto(alpha, 1.0),
            None,
        )
        .unwrap();
        let mrv = model.mrv().unwrap();
        let set = HyperplaneFamily::union(&[1.0, 1.0]).unwrap();
        let base = mrv_ruin_constant(&mrv, &set, &[c1, c2]).unwrap().constant;
        prop_assert!(base > 0.0);
        prop_assert!(mrv_ruin_constant(&mrv, &set, &[c1 + bump, c2]).unwrap().constant < base);
        prop_assert!(mrv_ruin_constant(&mrv, &set, &[c1, c2 + bump]).unwrap().constant < base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ruin_estimates_are_coupled_monotone(seed in any::<u64>(), levels in prop::collection::vec(0.01f64..30.0, 2..6)) {
        let mut levels = levels;
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let cfg = RiskConfig::new(
            ClaimModel::independent(vec![OneDimLaw::pareto(2.0, 1.0), OneDimLaw::exponential(1.0)]).unwrap(),
            Interarrival::Exponential { rate: 1.0 },
            vec![3.0, 2.0],
            vec![0.5, 0.5],
            &Solvency::Aggregate,
            Horizon { give_up: Some(200.0), ..Default::default() },
        )
        .unwrap();
        let est = simulate_ruin_grid(&cfg, &levels, 300, RngStream::new(seed, 0)).unwrap();
        prop_assert!(est.windows(2).all(|w| w[0].ruin_count >= w[1].ruin_count));
    }
}
