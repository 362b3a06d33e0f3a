//! Acceptance criteria 1 to 10. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; extra arguments select criteria by
//! number.

use std::time::Instant;

use rand::Rng;
use subexp::asymptotics::{h_curve_mc, h_curve_quadrature, mrv_asymptote, mrv_ruin_constant, mrv_ruin_constant_sampled};
use subexp::claims::{crnonlin_sum_survival, crnonlin_survival, AngularMeasure, ClaimModel, OneDimLaw};
use subexp::diagnostics::{convolution_ratio_mc, convolution_ratio_numeric, empirical_fa, scalarized_sample, SurvivalTable};
use subexp::lp::{self, Constraint, LinearProgram, Relation};
use subexp::rng::RngStream;
use subexp::ruinsets::{compile_bidask, BidAskSpec, HyperplaneFamily, LinearMapSpec};
use subexp::simulator::{ruin_vs_asymptote, simulate_ruin_grid, Horizon, Interarrival, RiskConfig, Solvency};

const SEED: u64 = 0x5EED_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (u32, &'static str, f64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "geometry exactness", 5.0, geometry),
        (2, "bid-ask compilation", 30.0, bidask),
        (3, "dyadic simplex exact values", 60.0, dyadic),
        (4, "convolution ratio", 180.0, convolution),
        (5, "numeric convolution", 10.0, numeric),
        (6, "simulator light-tail oracle", 60.0, light_tail),
        (7, "ruin asymptote at desk scale", 600.0, ruin_tail),
        (8, "regular-variation consistency", 120.0, mrv),
        (9, "H-curve cross-validation", 120.0, hcurve),
        (10, "reproducibility", f64::INFINITY, reproducibility),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let secs = t.elapsed().as_secs_f64();
        let in_time = secs <= limit;
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        let budget = if limit.is_finite() { format!("{secs:.1} s of {limit:.0} s") } else { format!("{secs:.1} s") };
        let late = if in_time { "" } else { ", over time budget" };
        println!("{} criterion {n} ({name}): {} [{budget}{late}]", if pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn geometry() -> Outcome {
    let mut rng = RngStream::new(SEED, 1).rng();
    let trials = 10_000;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let d = rng.random_range(1..=4usize);
        let k = rng.random_range(1..=5usize);
        let dirs: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let mut p: Vec<f64> = (0..d).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..3.0) }).collect();
                if p.iter().all(|&v| v == 0.0) {
                    p[rng.random_range(0..d)] = 1.0;
                }
                p
            })
            .collect();
        let f = HyperplaneFamily::new(d, dirs.clone()).unwrap();
        let oracle = |x: &[f64]| dirs.iter().map(|p| dot(p, x)).fold(0.0f64, f64::max);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = f.scale_index(&x).unwrap();
        if !close(y, oracle(&x), 1e-12) && (y - oracle(&x)).abs() > 1e-12 {
            failures.push(format!("index {trial}"));
        }
        let lam = rng.random_range(0.01..100.0);
        let lx: Vec<f64> = x.iter().map(|v| lam * v).collect();
        if !close(f.scale_index(&lx).unwrap(), lam * y, 1e-12) && (f.scale_index(&lx).unwrap() - lam * y).abs() > 1e-12 {
            failures.push(format!("homogeneity {trial}"));
        }
        let up: Vec<f64> = x.iter().map(|v| v + rng.random_range(0.0..2.0)).collect();
        if f.scale_index(&up).unwrap() < y {
            failures.push(format!("monotonicity {trial}"));
        }
        let u = rng.random_range(0.1..3.0);
        let v = u * rng.random_range(1.0..4.0);
        if f.contains(&x, v).unwrap() && !f.contains(&x, u).unwrap() {
            failures.push(format!("nesting {trial}"));
        }
        if f.contains(&x, u).unwrap() != (oracle(&x) > u) {
            failures.push(format!("membership {trial}"));
        }
        let mut theta: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().ln()).collect();
        let s: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|t| *t /= s);
        let h = f.height(&theta).unwrap();
        let yt = f.scale_index(&theta).unwrap();
        let ok = if h.is_finite() { close(h * yt, 1.0, 1e-12) } else { yt == 0.0 };
        if !ok {
            failures.push(format!("height {trial}"));
        }
        let rows = rng.random_range(1..=4usize);
        let t: Vec<Vec<f64>> = (0..rows).map(|_| (0..d).map(|_| rng.random_range(0.0..2.0)).collect()).collect();
        let map = LinearMapSpec::new(t.clone()).unwrap();
        let g = HyperplaneFamily::new(rows, (0..k).map(|_| (0..rows).map(|_| rng.random_range(0.0..2.0)).collect()).collect());
        if let Ok(g) = g {
            let pulled = g.pullback(&map).unwrap();
            let tx: Vec<f64> = t.iter().map(|r| dot(r, &x)).collect();
            let (a, b) = (pulled.scale_index(&x).unwrap(), g.scale_index(&tx).unwrap());
            if !close(a, b, 1e-12) && (a - b).abs() > 1e-12 {
                failures.push(format!("pullback {trial}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{trials} trials x 6 properties, {} failures {:?}", failures.len(), failures.iter().take(5).collect::<Vec<_>>()),
    )
}

/// Random bid-ask matrix: entries `1 + s`, then closed under `π_ij ≤ π_ik π_kj`.
fn random_bidask(rng: &mut impl Rng, d: usize) -> Vec<Vec<f64>> {
    let mut pi: Vec<Vec<f64>> =
        (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 1.0 + rng.random_range(0.0..1.5) }).collect()).collect();
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                pi[i][j] = pi[i][j].min(pi[i][k] * pi[k][j]);
            }
        }
    }
    pi
}

/// `z ∈ cone{ π_ij e_i − e_j, e_i }` by LP feasibility.
fn in_solvency_cone(pi: &[Vec<f64>], z: &[f64]) -> bool {
    let d = z.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut c = vec![0.0; d];
                c[i] = pi[i][j];
                c[j] = -1.0;
                cols.push(c);
            }
        }
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        cols.push(e);
    }
    let constraints = (0..d).map(|r| Constraint::new(cols.iter().map(|c| c[r]).collect(), Relation::Eq, z[r])).collect();
    lp::solve(&LinearProgram { objective: vec![0.0; cols.len()], constraints }).unwrap().is_feasible()
}

fn bidask() -> Outcome {
    let mut rng = RngStream::new(SEED, 2).rng();
    let (mut checked, mut skipped, mut disagreements) = (0, 0, 0);
    for d in [2usize, 3] {
        for _ in 0..100 {
            let pi = random_bidask(&mut rng, d);
            let mut b: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = b.iter().sum();
            b.iter_mut().for_each(|v| *v /= s);
            let f = compile_bidask(&BidAskSpec::new(pi.clone(), b.clone()).unwrap()).unwrap();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..2.0)).collect();
                let y = f.scale_index(&x).unwrap();
                if (y - 1.0).abs() <= 1e-9 {
                    skipped += 1;
                    continue;
                }
                let z: Vec<f64> = b.iter().zip(&x).map(|(bi, xi)| bi - xi).collect();
                let lp_ruin = !in_solvency_cone(&pi, &z);
                checked += 1;
                disagreements += usize::from(lp_ruin != (y > 1.0));
            }
        }
    }
    outcome(disagreements == 0, format!("{checked} points on 200 matrices, {disagreements} disagreements, {skipped} within 1e-9 of the boundary"))
}

fn sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

fn dyadic() -> Outcome {
    let n = 1_000_000usize;
    let sample = ClaimModel::DyadicSimplex.sample(RngStream::new(SEED, 3), n).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (x, exact) in [(1.0f64, 1.0 / 3.0), (2.0, 1.0 / 6.0), (8.0, 1.0 / 24.0)] {
        let lvl = x.log2().floor() as i32;
        let formula = (-(lvl + 1) as f64).exp2() - x / 3.0 * (-(2 * lvl + 1) as f64).exp2();
        let lib = crnonlin_survival(x).unwrap();
        let hits = sample.iter().filter(|v| v[0] > x).count();
        let z = (hits as f64 / n as f64 - exact) / sigma(exact, n as f64);
        ok &= (formula - exact).abs() < 1e-15 && (lib - exact).abs() < 1e-15 && z.abs() < 4.0;
        parts.push(format!("x={x}: z={z:+.2}"));
    }
    let ratios_exact = (1..=10).all(|k: u32| {
        let t = 2f64.powi(k as i32);
        crnonlin_sum_survival(t).unwrap() / crnonlin_sum_survival(t - 1.0).unwrap() == 0.5
    });
    ok &= ratios_exact;
    outcome(ok, format!("{}; sum-law ratio exactly 1/2 for n=1..10: {ratios_exact}", parts.join(", ")))
}

fn convolution() -> Outcome {
    let n = 10_000_000u64;
    let model = ClaimModel::independent(vec![OneDimLaw::pareto(1.5, 1.0), OneDimLaw::pareto(1.5, 1.0)]).unwrap();
    let set = HyperplaneFamily::aggregate(&[1.0, 1.0]).unwrap();
    let mut ys = scalarized_sample(&model, &set, n, RngStream::new(SEED, 40)).unwrap();
    ys.sort_unstable_by(f64::total_cmp);
    let levels: Vec<f64> = [0.99, 0.995, 0.999].iter().map(|q| ys[(q * n as f64) as usize - 1]).collect();
    drop(ys);
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [2usize, 3] {
        let rep = convolution_ratio_mc(&model, &set, m, &levels, n, RngStream::new(SEED, 40 + m as u64)).unwrap();
        let top = rep.verdict.last().unwrap();
        let band = (0.8 * m as f64, 1.2 * m as f64);
        let inside = top.ratio >= band.0 && top.ratio <= band.1;
        ok &= inside && rep.sandwich_holds();
        parts.push(format!("m={m}: ratio {:.3} [{:.3}, {:.3}] at u={:.1}, sandwich {}", top.ratio, top.lo, top.hi, top.u, rep.sandwich_holds()));
    }
    outcome(ok, parts.join("; "))
}

fn numeric() -> Outcome {
    let exp = SurvivalTable::geometric(|t| (-t).exp(), 1e-6, 60.0, 6000).unwrap();
    let at: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
    let r = convolution_ratio_numeric(&exp, Some(&at), 0.01).unwrap();
    let worst = r.points.iter().map(|p| (p.ratio / (1.0 + p.t) - 1.0).abs()).fold(0.0, f64::max);
    let pareto = SurvivalTable::geometric(|t| if t < 1.0 { 1.0 } else { t.powi(-2) }, 1e-4, 1e5, 6000).unwrap();
    let p = convolution_ratio_numeric(&pareto, Some(&[1e3]), 0.01).unwrap();
    let pr = p.points[0].ratio;
    outcome(
        worst < 0.01 && (1.9..=2.1).contains(&pr),
        format!("Exp(1) max relative error vs 1+t on (0, 20]: {worst:.2e}; Pareto(2) ratio at 1e3: {pr:.4}"),
    )
}

fn lundberg() -> RiskConfig {
    RiskConfig::new(
        ClaimModel::independent(vec![OneDimLaw::exponential(1.0)]).unwrap(),
        Interarrival::Exponential { rate: 1.0 },
        vec![1.25],
        vec![1.0],
        &Solvency::Coordinatewise,
        Horizon::default(),
    )
    .unwrap()
}

fn light_tail() -> Outcome {
    let n = 100_000u64;
    let est = simulate_ruin_grid(&lundberg(), &[1e-12, 10.0], n, RngStream::new(SEED, 6)).unwrap();
    // ψ(u) = (λμ/p) exp(−(1/μ − λ/p) u) with λ = μ = 1, p = 1.25.
    let psi = |u: f64| 0.8 * (-(1.0 - 0.8) * u).exp();
    let mut ok = true;
    let mut parts = Vec::new();
    for e in &est {
        let exact = psi(e.u);
        let z = (e.estimate - exact) / sigma(exact, n as f64);
        ok &= z.abs() < 4.0;
        parts.push(format!("u={}: {:.5} vs {:.5} (z={z:+.2}, truncated {})", if e.u < 1e-6 { "0+".into() } else { e.u.to_string() }, e.estimate, exact, e.truncated_paths));
    }
    outcome(ok, parts.join("; "))
}

fn ruin_tail() -> Outcome {
    let cfg = RiskConfig::new(
        ClaimModel::independent(vec![OneDimLaw::pareto(1.5, 1.0)]).unwrap(),
        Interarrival::Exponential { rate: 1.0 },
        vec![9.0],
        vec![1.0],
        &Solvency::Coordinatewise,
        Horizon { continuation: true, ..Default::default() },
    )
    .unwrap();
    // Levels where H = 10^-0.5 (approximately), 1e-1, 1e-2, 1e-3 with H(u) = u^(-1/2)/3.
    let levels = [1.1, 1.0 / 9.0 * 1e2, 1.0 / 9.0 * 1e4, 1.0 / 9.0 * 1e6];
    let cmp = ruin_vs_asymptote(&cfg, &levels, 1_000_000, RngStream::new(SEED, 7), None).unwrap();
    let top = cmp.rows.last().unwrap();
    let closed = top.u.powf(-0.5) / 3.0;
    let ok = (0.75..=1.25).contains(&top.ratio)
        && (5e-4..=2e-3).contains(&top.psi_hat)
        && cmp.steps_toward_one >= 2
        && close(top.h, closed, 1e-6);
    let ratios: Vec<String> = cmp.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect();
    outcome(
        ok,
        format!(
            "psi_hat {:.3e} at u={:.3e}, ratio {:.3} [{:.3}, {:.3}], ratios {}, {} of 3 top steps toward 1",
            top.psi_hat,
            top.u,
            top.ratio,
            top.ratio_lo,
            top.ratio_hi,
            ratios.join(" "),
            cmp.steps_toward_one
        ),
    )
}

fn mrv() -> Outcome {
    let alpha = 2.0;
    let radial = OneDimLaw::pareto(alpha, 1.0);
    let diag = ClaimModel::polar(AngularMeasure::atoms(vec![(vec![0.5, 0.5], 1.0)]).unwrap(), radial.clone(), None).unwrap();
    let k = mrv_ruin_constant(&diag.mrv().unwrap(), &HyperplaneFamily::aggregate(&[0.5, 0.5]).unwrap(), &[1.0, 1.0]).unwrap();
    let quarter = (k.constant - 0.25).abs() < 1e-6;

    let set = HyperplaneFamily::aggregate(&[1.0, 2.0]).unwrap();
    let c = [0.5, 0.25];
    let levels = [5.0, 20.0, 80.0];
    let atoms = ClaimModel::polar(
        AngularMeasure::atoms(vec![(vec![0.2, 0.8], 0.5), (vec![0.6, 0.4], 0.3), (vec![1.0, 0.0], 0.2)]).unwrap(),
        radial.clone(),
        None,
    )
    .unwrap();
    let top = *levels.last().unwrap();
    let h_atoms = h_curve_quadrature(&atoms, &set, &c, &levels).unwrap().points.last().unwrap().estimate;
    let m_atoms = atoms.mrv().unwrap();
    let a_atoms = mrv_asymptote(&m_atoms, &mrv_ruin_constant(&m_atoms, &set, &c).unwrap(), top);

    let uniform = ClaimModel::polar(AngularMeasure::Uniform { dim: 2 }, radial, None).unwrap();
    let h_uni = h_curve_mc(&uniform, &set, &c, &levels, 10_000_000, RngStream::new(SEED, 80)).unwrap();
    let h_uni = h_uni.points.last().unwrap().clone();
    let m_uni = uniform.mrv().unwrap();
    let k_uni = mrv_ruin_constant_sampled(&m_uni, &set, &c, 20_000, RngStream::new(SEED, 81)).unwrap();
    let a_uni = mrv_asymptote(&m_uni, &k_uni, top);

    let rel_atoms = h_atoms / a_atoms - 1.0;
    let rel_uni = h_uni.estimate / a_uni - 1.0;
    outcome(
        quarter && rel_atoms.abs() < 0.1 && rel_uni.abs() < 0.1,
        format!(
            "diagonal atom constant {:.9}; at u={top}: atoms H {h_atoms:.4e} vs {a_atoms:.4e} ({rel_atoms:+.2e}), uniform H {:.4e} (se {:.1e}) vs {a_uni:.4e} ({rel_uni:+.3})",
            k.constant, h_uni.estimate, h_uni.stderr
        ),
    )
}

fn hcurve() -> Outcome {
    let ind = |m: Vec<OneDimLaw>| ClaimModel::independent(m).unwrap();
    let configs: Vec<(ClaimModel, HyperplaneFamily, Vec<f64>, Vec<f64>)> = vec![
        (ind(vec![OneDimLaw::pareto(2.5, 1.0), OneDimLaw::exponential(1.0)]), HyperplaneFamily::union(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0], vec![1.0, 4.0, 16.0]),
        (
            ind(vec![OneDimLaw::Weibull { shape: 0.5, scale: 1.0 }, OneDimLaw::Lognormal { mu: 0.0, sigma: 1.0 }]),
            HyperplaneFamily::union(&[2.0, 1.0]).unwrap(),
            vec![0.5, 1.5],
            vec![2.0, 8.0, 32.0],
        ),
        (
            ind(vec![OneDimLaw::pareto(3.0, 1.0), OneDimLaw::pareto(2.2, 2.0), OneDimLaw::exponential(0.5)]),
            HyperplaneFamily::union(&[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 2.0, 0.5],
            vec![3.0, 10.0, 30.0],
        ),
        (ind(vec![OneDimLaw::pareto(2.5, 1.0), OneDimLaw::pareto(2.5, 1.0)]), HyperplaneFamily::aggregate(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0], vec![3.0, 10.0, 30.0]),
        (
            ind(vec![OneDimLaw::Lognormal { mu: 0.5, sigma: 0.8 }, OneDimLaw::pareto(3.5, 1.0)]),
            HyperplaneFamily::aggregate(&[0.5, 2.0]).unwrap(),
            vec![2.0, 0.5],
            vec![2.0, 6.0, 18.0],
        ),
    ];
    let mut worst_z = 0.0f64;
    for (i, (model, set, c, levels)) in configs.iter().enumerate() {
        let q = h_curve_quadrature(model, set, c, levels).unwrap();
        let m = h_curve_mc(model, set, c, levels, 1_000_000, RngStream::new(SEED, 90 + i as u64)).unwrap();
        for (a, b) in q.points.iter().zip(&m.points) {
            worst_z = worst_z.max((a.estimate - b.estimate).abs() / b.stderr);
        }
    }
    let mut worst_rel = 0.0f64;
    for alpha in [1.5, 2.5] {
        for c in [0.5, 2.0] {
            let model = ClaimModel::independent(vec![OneDimLaw::pareto(alpha, 1.0)]).unwrap();
            let levels = [2.0, 10.0, 1000.0];
            let q = h_curve_quadrature(&model, &HyperplaneFamily::union(&[1.0]).unwrap(), &[c], &levels).unwrap();
            for p in &q.points {
                let exact = p.level.powf(1.0 - alpha) / (c * (alpha - 1.0));
                worst_rel = worst_rel.max((p.estimate / exact - 1.0).abs());
            }
        }
    }
    outcome(
        worst_z < 4.0 && worst_rel < 1e-6,
        format!("5 configs, largest |quadrature - mc| = {worst_z:.2} sigma; 1-D closed form max relative error {worst_rel:.2e}"),
    )
}

fn artifacts(threads: usize) -> Vec<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let model = ClaimModel::independent(vec![OneDimLaw::pareto(1.5, 1.0), OneDimLaw::pareto(1.5, 1.0)]).unwrap();
        let set = HyperplaneFamily::aggregate(&[1.0, 1.0]).unwrap();
        let levels = [10.0, 30.0, 100.0];
        let s = RngStream::new(SEED, 10);
        vec![
            empirical_fa(&model, &set, &levels, 200_000, s.split(0)).unwrap().to_csv(),
            serde_json::to_string(&convolution_ratio_mc(&model, &set, 2, &levels, 200_000, s.split(1)).unwrap().verdict).unwrap(),
            h_curve_mc(&model, &set, &[1.0, 1.0], &levels, 200_000, s.split(2)).unwrap().to_h_csv(),
            ruin_vs_asymptote(&lundberg(), &[1.0, 5.0, 10.0], 10_000, s.split(3), None).unwrap().to_csv(),
        ]
    })
}

fn reproducibility() -> Outcome {
    let a = artifacts(1);
    let b = artifacts(1);
    let c = artifacts(3);
    let same = a == b && a == c;
    outcome(same, format!("{} CSV/JSON artifacts byte-identical across reruns and worker counts: {same}", a.len()))
}
