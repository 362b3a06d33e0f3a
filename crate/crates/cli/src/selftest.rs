use rand::Rng;
use subexp::claims::{crnonlin_sum_survival, crnonlin_survival, ClaimModel, OneDimLaw};
use subexp::rng::RngStream;
use subexp::ruinsets::{compile_bidask, validate, BidAskSpec, HyperplaneFamily, LinearMapSpec};
use subexp::simulator::{simulate_ruin_grid, Horizon, Interarrival, RiskConfig, Solvency};

/// Statistical checks use this many standard errors.
const SIGMAS: f64 = 5.0;
const GEOMETRY_TRIALS: usize = 2000;

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Direction table used by the geometry checks.
pub struct Table {
    pub dim: usize,
    pub directions: Vec<Vec<f64>>,
}

pub fn default_tables() -> Vec<Table> {
    let bidask = compile_bidask(&BidAskSpec::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.5, 0.5]).expect("valid"))
        .expect("two-dimensional");
    vec![
        Table { dim: 2, directions: HyperplaneFamily::union(&[1.0, 2.0]).expect("valid").directions().to_vec() },
        Table { dim: 3, directions: vec![vec![1.0, 1.0, 1.0]] },
        Table { dim: 2, directions: bidask.directions().to_vec() },
        Table { dim: 3, directions: vec![vec![1.0, 0.2, 0.0], vec![0.0, 0.5, 2.0], vec![0.3, 0.3, 0.3]] },
    ]
}

pub fn run(seed: u64, tables: &[Table]) -> Vec<Check> {
    let master = RngStream::new(seed, 0);
    let mut out = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        out.push(geometry(i, t, master.split(i as u64)));
    }
    out.extend(crnonlin(master.split(100)));
    out.extend(lundberg(master.split(200)));
    out
}

fn geometry(i: usize, t: &Table, stream: RngStream) -> Check {
    let name = format!("geometry table {i}");
    if let Err(v) = validate(t.dim, &t.directions) {
        return check(&name, false, format!("invariant 'valid direction table' broken: {v}"));
    }
    let f = HyperplaneFamily::new(t.dim, t.directions.clone()).expect("validated");
    let d = t.dim;
    let mut rng = stream.rng();
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    for _ in 0..GEOMETRY_TRIALS {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..4.0)).collect();
        let bump: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let lam: f64 = rng.random_range(0.1..10.0);
        let y = f.index_of(&x);
        let scaled: Vec<f64> = x.iter().map(|v| lam * v).collect();
        if !rel(f.index_of(&scaled), lam * y) {
            return check(&name, false, format!("invariant 'homogeneity' broken at {x:?}"));
        }
        let above: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        if f.index_of(&above) < y - 1e-12 {
            return check(&name, false, format!("invariant 'monotonicity' broken at {x:?}"));
        }
        let (u, v) = (rng.random_range(0.1..2.0), rng.random_range(2.0..4.0));
        if f.contains(&x, v).expect("dim") && !f.contains(&x, u).expect("dim") {
            return check(&name, false, format!("invariant 'nesting' broken at {x:?}"));
        }
        let mut theta: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|v| *v /= s);
        let h = f.height(&theta).expect("dim");
        if h.is_finite() && !rel(h * f.index_of(&theta), 1.0) {
            return check(&name, false, format!("invariant 'height times scale index is 1' broken at {theta:?}"));
        }
        let map = LinearMapSpec::new((0..d).map(|_| (0..d).map(|_| rng.random_range(0.0..2.0)).collect()).collect())
            .expect("nonnegative");
        let pulled = f.pullback(&map).expect("dim");
        if !rel(pulled.index_of(&x), f.index_of(&map.apply(&x).expect("dim"))) {
            return check(&name, false, format!("invariant 'pullback commutation' broken at {x:?}"));
        }
    }
    check(&name, true, format!("{GEOMETRY_TRIALS} randomized checks"))
}

fn within(est: f64, exact: f64, n: u64) -> (bool, String) {
    let sd = (exact * (1.0 - exact) / n as f64).sqrt();
    let z = (est - exact) / sd;
    (z.abs() < SIGMAS, format!("estimate {est:.5} vs {exact:.5} ({z:+.2} sigma)"))
}

fn crnonlin(stream: RngStream) -> Vec<Check> {
    let mut out = Vec::new();
    let exact_ok = [(1.0, 1.0 / 3.0), (2.0, 1.0 / 6.0), (8.0, 1.0 / 24.0)]
        .iter()
        .all(|&(x, v)| (crnonlin_survival(x).expect("x >= 0") - v).abs() < 1e-15);
    let ratio_ok = (1..=10).all(|n| {
        let hi = crnonlin_sum_survival((1u64 << n) as f64).expect("x >= 0");
        let lo = crnonlin_sum_survival(((1u64 << n) - 1) as f64).expect("x >= 0");
        hi / lo == 0.5
    });
    out.push(check("crnonlin exact values", exact_ok && ratio_ok, "marginal values and sum-law ratios".into()));
    let n = 200_000u64;
    let sample = ClaimModel::DyadicSimplex.sample(stream, n as usize).expect("valid model");
    for x in [1.0, 2.0, 8.0] {
        let hits = sample.iter().filter(|v| v[0] > x).count();
        let (ok, detail) = within(hits as f64 / n as f64, crnonlin_survival(x).expect("x >= 0"), n);
        out.push(check(&format!("crnonlin sampler at x = {x}"), ok, detail));
    }
    out
}

fn lundberg(stream: RngStream) -> Vec<Check> {
    let cfg = RiskConfig::new(
        ClaimModel::independent(vec![OneDimLaw::exponential(1.0)]).expect("valid"),
        Interarrival::Exponential { rate: 1.0 },
        vec![1.25],
        vec![1.0],
        &Solvency::Coordinatewise,
        Horizon::default(),
    )
    .expect("valid");
    let n = 10_000u64;
    let est = simulate_ruin_grid(&cfg, &[1e-12, 10.0], n, stream).expect("valid grid");
    [(0, 0.8, "Cramer-Lundberg psi(0+)"), (1, 0.8 * (-2f64).exp(), "Cramer-Lundberg psi(10)")]
        .iter()
        .map(|&(i, exact, name)| {
            let (ok, detail) = within(est[i].estimate, exact, n);
            check(name, ok, detail)
        })
        .collect()
}
