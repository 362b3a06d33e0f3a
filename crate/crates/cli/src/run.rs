use serde_json::{json, Value};
use subexp::asymptotics::{h_curve_mc, h_curve_quadrature, mrv_ruin_constant, theta_normalizer, theta_normalizer_mc};
use subexp::claims::ClaimModel;
use subexp::diagnostics::{
    convolution_ratio_mc, convolution_ratio_numeric, dominated_variation_test, empirical_fa, empirical_quantile,
    kesten_check, long_tail_test, random_sum_ratio, translation_test, SurvivalTable, TailCurve,
};
use subexp::rng::RngStream;
use subexp::ruinsets::RuinSet;
use subexp::simulator::{ruin_vs_asymptote, simulate_ruin_grid, RiskConfig};
use subexp::{Error, Result};

use crate::config::{DiagnosticTest, HMethod};
use crate::plan::{Levels, Plan};
use crate::svg::{render, Plot, Series};

/// A named output file.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Verdicts and headline numbers copied into the report.
    pub summary: Value,
}

struct Out<'a> {
    hash: &'a str,
    artifacts: Vec<Artifact>,
}

impl Out<'_> {
    fn text(&mut self, name: impl Into<String>, body: String) {
        self.artifacts.push(Artifact { name: name.into(), bytes: body.into_bytes() });
    }

    /// JSON artifact stamped with the config hash.
    fn json(&mut self, name: impl Into<String>, body: Value) {
        let mut obj = serde_json::Map::new();
        obj.insert("config_hash".into(), Value::String(self.hash.to_string()));
        match body {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("plain data");
        s.push('\n');
        self.text(name, s);
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

pub fn execute(plan: &Plan, seed: u64, hash: &str) -> Result<Outcome> {
    let master = RngStream::new(seed, 0);
    let mut out = Out { hash, artifacts: Vec::new() };
    let summary = match plan {
        Plan::Diagnose { model, set, n, levels, tests } => diagnose(&mut out, model, set, *n, levels, tests, master)?,
        Plan::Hcurve { model, set, c, levels, method, n } => hcurve(&mut out, model, set, c, levels, *method, *n, master)?,
        Plan::Ruin { risk, levels, n_paths } => ruin(&mut out, risk, levels, *n_paths, master)?,
        Plan::Compare { risk, levels, n_paths } => compare(&mut out, risk, levels, *n_paths, master)?,
        Plan::Geometry { set, points, levels } => geometry(&mut out, set, points, levels)?,
    };
    Ok(Outcome { artifacts: out.artifacts, summary })
}

fn diagnose(
    out: &mut Out,
    model: &ClaimModel,
    set: &RuinSet,
    n: u64,
    levels: &Levels,
    tests: &[DiagnosticTest],
    master: RngStream,
) -> Result<Value> {
    let grid: Vec<f64> = match levels {
        Levels::Fixed(l) => l.clone(),
        Levels::Quantiles(q) => {
            let mut g = Vec::with_capacity(q.len());
            for (i, &p) in q.iter().enumerate() {
                g.push(empirical_quantile(model, set, p, n, master.split(0).split(i as u64))?);
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Degenerate(format!("quantile levels are not strictly increasing: {g:?}")));
            }
            g
        }
    };
    let exact = |t: f64| {
        set.family().and_then(|f| model.scalar_survival(f, t)).expect("checked while planning")
    };
    let mut verdicts = Vec::new();
    for (i, test) in tests.iter().enumerate() {
        let s = master.split(i as u64 + 1);
        let name = format!("diagnose_{:02}_{}", i + 1, test.name());
        let (verdict, body) = match test {
            DiagnosticTest::Empirical => {
                let c = empirical_fa(model, set, &grid, n, s)?;
                out.text(format!("{name}.csv"), c.to_csv());
                (None, to_value(&c))
            }
            DiagnosticTest::Convolution { m } => {
                let r = convolution_ratio_mc(model, set, *m, &grid, n, s)?;
                (Some(r.verdict.verdict), json!({ "m": r.m, "verdict": r.verdict, "sandwich": r.sandwich, "sandwich_holds": r.sandwich_holds(), "numerator_hits": r.numerator_hits, "denominator_hits": r.denominator_hits }))
            }
            DiagnosticTest::RandomSum { p } => {
                let r = random_sum_ratio(model, set, *p, &grid, n, s)?;
                (Some(r.verdict), json!({ "p": p, "verdict": r }))
            }
            DiagnosticTest::Translation { a } => {
                let r = translation_test(model, set, a, &grid, n, s)?;
                (Some(r.verdict), json!({ "a": a, "verdict": r }))
            }
            DiagnosticTest::Kesten { epsilon, m_max } => {
                let r = kesten_check(model, set, *epsilon, *m_max, &grid, n, s)?;
                (None, to_value(&r))
            }
            DiagnosticTest::Numeric { t_max, points, tol } => {
                let table = SurvivalTable::geometric(exact, t_max * 1e-6, *t_max, *points)?;
                let at: Vec<f64> = grid.iter().copied().filter(|&t| t <= *t_max).collect();
                let r = convolution_ratio_numeric(&table, Some(&at), *tol)?;
                (Some(r.verdict.verdict), json!({ "points": r.points, "verdict": r.verdict }))
            }
            DiagnosticTest::LongTail { y, tol } => {
                let r = long_tail_test(exact, *y, &grid, *tol)?;
                (Some(r.verdict), json!({ "y": y, "verdict": r }))
            }
            DiagnosticTest::DominatedVariation => {
                let r = dominated_variation_test(exact, &grid)?;
                (Some(r.verdict), to_value(&r))
            }
        };
        out.json(format!("{name}.json"), json!({ "test": test, "levels": grid, "result": body }));
        verdicts.push(json!({ "test": test.name(), "verdict": verdict }));
    }
    Ok(json!({ "levels": grid, "verdicts": verdicts }))
}

#[allow(clippy::too_many_arguments)]
fn hcurve(
    out: &mut Out,
    model: &ClaimModel,
    set: &RuinSet,
    c: &[f64],
    levels: &[f64],
    method: HMethod,
    n: u64,
    master: RngStream,
) -> Result<Value> {
    let quad = || -> Result<TailCurve> { h_curve_quadrature(model, set.family().expect("checked"), c, levels) };
    let curve = match (method, set.family()) {
        (HMethod::Mc, _) | (HMethod::Auto, None) => h_curve_mc(model, set, c, levels, n, master.split(1))?,
        (HMethod::Quadrature, _) => quad()?,
        (HMethod::Auto, Some(_)) => match quad() {
            Err(Error::Unsupported(_)) => h_curve_mc(model, set, c, levels, n, master.split(1))?,
            r => r?,
        },
    };
    let theta = match theta_normalizer(model, c) {
        Err(Error::Unsupported(_)) => theta_normalizer_mc(model, c, n, master.split(2))?,
        r => r?,
    };
    out.text("hcurve.csv", curve.to_h_csv());
    let constant = match (model.mrv(), set.family()) {
        (Some(m), Some(f)) => Some(mrv_ruin_constant(&m, f, c)?),
        _ => None,
    };
    if let Some(k) = &constant {
        out.json("constants.json", json!({ "alpha": k.alpha, "constant": k.constant, "quadrature_error": k.quadrature_error }));
    }
    out.json("hcurve.json", json!({ "curve": curve, "theta": theta, "mrv": constant }));
    let values = curve.values();
    let x = curve.levels();
    let lo: Vec<f64> = curve.points.iter().map(|p| p.estimate - 1.96 * p.stderr).collect();
    let hi: Vec<f64> = curve.points.iter().map(|p| p.estimate + 1.96 * p.stderr).collect();
    out.text(
        "hcurve.svg",
        render(&Plot {
            title: "Ruin asymptote H(u)",
            x_label: "u",
            y_label: "H(u)",
            x: &x,
            series: vec![Series { label: "H", y: &values, band: Some((&lo, &hi)) }],
            log_x: true,
            log_y: true,
            reference: None,
            config_hash: out.hash,
        }),
    );
    Ok(json!({ "method": curve.method, "theta": theta.value, "H_at_top": values.last() }))
}

fn risk_json(risk: &RiskConfig) -> Value {
    json!({
        "loading": risk.loading,
        "give_up": risk.give_up,
        "max_steps": risk.max_steps,
        "continuation": risk.continuation,
    })
}

fn ruin(out: &mut Out, risk: &RiskConfig, levels: &[f64], n_paths: u64, master: RngStream) -> Result<Value> {
    let est = simulate_ruin_grid(risk, levels, n_paths, master)?;
    let mut csv = String::from("u,psi_hat,ci_lo,ci_hi,ruin_count,n_paths,truncated_frac,mean_steps\r\n");
    for e in &est {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\r\n",
            e.u,
            e.estimate,
            e.ci_lo,
            e.ci_hi,
            e.ruin_count,
            e.n_paths,
            e.truncated_fraction(),
            e.mean_steps
        ));
    }
    out.text("ruin.csv", csv);
    out.json("ruin.json", json!({ "risk": risk_json(risk), "estimates": est }));
    let worst = est.iter().map(|e| e.truncated_fraction()).fold(0.0, f64::max);
    Ok(json!({ "psi_at_top": est.last().map(|e| e.estimate), "max_truncated_frac": worst }))
}

fn compare(out: &mut Out, risk: &RiskConfig, levels: &[f64], n_paths: u64, master: RngStream) -> Result<Value> {
    let cmp = ruin_vs_asymptote(risk, levels, n_paths, master, None)?;
    out.text("comparison.csv", cmp.to_csv());
    out.json("comparison.json", json!({ "risk": risk_json(risk), "comparison": cmp }));
    let ratio: Vec<f64> = cmp.rows.iter().map(|r| r.ratio).collect();
    let lo: Vec<f64> = cmp.rows.iter().map(|r| r.ratio_lo).collect();
    let hi: Vec<f64> = cmp.rows.iter().map(|r| r.ratio_hi).collect();
    out.text(
        "ratio.svg",
        render(&Plot {
            title: "Simulated ruin probability over the asymptote",
            x_label: "u",
            y_label: "psi/H",
            x: levels,
            series: vec![Series { label: "psi_hat/H", y: &ratio, band: Some((&lo, &hi)) }],
            log_x: true,
            log_y: false,
            reference: Some(1.0),
            config_hash: out.hash,
        }),
    );
    let top = cmp.rows.last().expect("nonempty grid");
    Ok(json!({
        "h_method": cmp.h_method,
        "ratio_at_top": top.ratio,
        "ratio_ci_at_top": [top.ratio_lo, top.ratio_hi],
        "steps_toward_one": cmp.steps_toward_one,
        "max_truncated_frac": cmp.rows.iter().map(|r| r.truncated_frac).fold(0.0, f64::max),
    }))
}

fn geometry(out: &mut Out, set: &RuinSet, points: &[Vec<f64>], levels: &[f64]) -> Result<Value> {
    let family = set.family();
    let redundant: Option<Vec<usize>> = match family {
        Some(f) => {
            let mut r = Vec::new();
            for j in 0..f.directions().len() {
                if f.is_redundant(j)? {
                    r.push(j);
                }
            }
            Some(r)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for x in points {
        let index = set.scale_index(x)?;
        let inside: Vec<bool> = levels.iter().map(|&u| index > u).collect();
        rows.push(json!({ "point": x, "index": index, "contains": inside }));
    }
    out.json(
        "geometry.json",
        json!({
            "dim": set.dim(),
            "directions": family.map(|f| f.directions().to_vec()),
            "redundant": redundant,
            "levels": levels,
            "memberships": rows,
        }),
    );
    Ok(json!({ "directions": family.map(|f| f.directions().len()), "points": points.len() }))
}

/// Printable listing of a ruin set and sample memberships for `inspect`.
pub fn inspect_text(set: &RuinSet, points: &[Vec<f64>]) -> Result<String> {
    let mut s = String::new();
    match set.family() {
        Some(f) => {
            s.push_str(&format!("dimension {}, {} direction(s)\n", f.dim(), f.directions().len()));
            for (k, p) in f.directions().iter().enumerate() {
                let redundant = if f.is_redundant(k)? { "  (redundant)" } else { "" };
                s.push_str(&format!("  p{k} = {p:?}{redundant}\n"));
            }
        }
        None => s.push_str(&format!("dimension {}, bid-ask cone evaluated by linear programming\n", set.dim())),
    }
    for x in points {
        let y = set.scale_index(x)?;
        s.push_str(&format!("  Y({x:?}) = {y}  (in A: {})\n", y > 1.0));
    }
    Ok(s)
}
