use subexp::claims::ClaimModel;
use subexp::ruinsets::{RuinSet, RuinSetDescriptor};
use subexp::simulator::{RiskConfig, Solvency};

use crate::config::{
    locate, ConfigError, DiagnoseSpec, DiagnosticTest, ExperimentConfig, GeometrySpec, HMethod, HcurveSpec, Kind, RuinSpec,
};

/// Validated experiment, ready to run.
pub enum Plan {
    Diagnose { model: ClaimModel, set: RuinSet, n: u64, levels: Levels, tests: Vec<DiagnosticTest> },
    Hcurve { model: ClaimModel, set: RuinSet, c: Vec<f64>, levels: Vec<f64>, method: HMethod, n: u64 },
    Ruin { risk: RiskConfig, levels: Vec<f64>, n_paths: u64 },
    Compare { risk: RiskConfig, levels: Vec<f64>, n_paths: u64 },
    Geometry { set: RuinSet, points: Vec<Vec<f64>>, levels: Vec<f64> },
}

pub enum Levels {
    Fixed(Vec<f64>),
    Quantiles(Vec<f64>),
}

struct Ctx<'a> {
    text: &'a str,
    section: &'static str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, message: impl std::fmt::Display) -> ConfigError {
        ConfigError { line: locate(self.text, self.section, key), message: format!("{}: {message}", self.section) }
    }

    fn ruin_set(&self, d: &RuinSetDescriptor) -> Result<RuinSet, ConfigError> {
        let key = if matches!(d, RuinSetDescriptor::Bidask { .. }) { "pi" } else { "ruin_set" };
        d.build().map_err(|e| self.err(key, e))
    }

    fn grid(&self, key: &str, levels: &[f64], min: f64) -> Result<(), ConfigError> {
        if levels.is_empty() {
            return Err(self.err(key, "empty level grid"));
        }
        if levels.iter().any(|&u| !(u > min) || !u.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(self.err(key, format!("levels must be finite, above {min} and strictly increasing")));
        }
        Ok(())
    }

    fn positive(&self, key: &str, n: u64) -> Result<(), ConfigError> {
        if n == 0 {
            return Err(self.err(key, "sample size must be positive"));
        }
        Ok(())
    }
}

pub fn build(cfg: &ExperimentConfig, text: &str) -> Result<Plan, ConfigError> {
    let kind = cfg.kind().map_err(|message| ConfigError { line: 1, message })?;
    let ctx = Ctx { text, section: kind.name() };
    match kind {
        Kind::Diagnose => diagnose(&ctx, cfg.diagnose.as_ref().expect("kind")),
        Kind::Hcurve => hcurve(&ctx, cfg.hcurve.as_ref().expect("kind")),
        Kind::Ruin => {
            let (risk, levels, n_paths) = ruin(&ctx, cfg.ruin.as_ref().expect("kind"))?;
            Ok(Plan::Ruin { risk, levels, n_paths })
        }
        Kind::Compare => {
            let (risk, levels, n_paths) = ruin(&ctx, cfg.compare.as_ref().expect("kind"))?;
            Ok(Plan::Compare { risk, levels, n_paths })
        }
        Kind::Geometry => geometry(&ctx, cfg.geometry.as_ref().expect("kind")),
    }
}

fn diagnose(ctx: &Ctx, s: &DiagnoseSpec) -> Result<Plan, ConfigError> {
    s.model.validate().map_err(|e| ctx.err("model", e))?;
    let set = ctx.ruin_set(&s.ruin_set)?;
    if set.dim() != s.model.dim() {
        return Err(ctx.err("ruin_set", "ruin set and model dimensions differ"));
    }
    ctx.positive("n", s.n)?;
    let levels = match (&s.levels, &s.quantiles) {
        (Some(l), None) => {
            ctx.grid("levels", l, 0.0)?;
            Levels::Fixed(l.clone())
        }
        (None, Some(q)) => {
            ctx.grid("quantiles", q, 0.0)?;
            if q.iter().any(|&v| v >= 1.0) {
                return Err(ctx.err("quantiles", "quantiles must lie in (0, 1)"));
            }
            Levels::Quantiles(q.clone())
        }
        _ => return Err(ctx.err("levels", "give exactly one of levels or quantiles")),
    };
    if s.tests.is_empty() {
        return Err(ctx.err("tests", "no diagnostic tests listed"));
    }
    for t in &s.tests {
        let bad = |m: &str| Err(ctx.err("tests", format!("{}: {m}", t.name())));
        match t {
            DiagnosticTest::Convolution { m } if *m == 0 => return bad("m must be at least 1"),
            DiagnosticTest::RandomSum { p } if !(*p > 0.0 && *p <= 1.0) => return bad("p must lie in (0, 1]"),
            DiagnosticTest::Translation { a } if a.len() != s.model.dim() => return bad("shift has the wrong dimension"),
            DiagnosticTest::Kesten { epsilon, m_max } if !(*epsilon > 0.0) || *m_max == 0 => {
                return bad("needs epsilon > 0 and m_max >= 1")
            }
            DiagnosticTest::Numeric { t_max, points, .. } if !(*t_max > 0.0) || *points < subexp::diagnostics::MIN_TABLE => {
                return bad(&format!("needs t_max > 0 and at least {} points", subexp::diagnostics::MIN_TABLE))
            }
            DiagnosticTest::Numeric { .. } | DiagnosticTest::LongTail { .. } | DiagnosticTest::DominatedVariation => {
                let exact = set.family().and_then(|f| s.model.scalar_survival(f, 1.0));
                if exact.is_none() {
                    return bad("needs a model with a closed-form scalarized survival");
                }
                if matches!(levels, Levels::Quantiles(_)) && !matches!(t, DiagnosticTest::Numeric { .. }) {
                    return bad("needs explicit levels");
                }
            }
            _ => {}
        }
    }
    Ok(Plan::Diagnose { model: s.model.clone(), set, n: s.n, levels, tests: s.tests.clone() })
}

fn hcurve(ctx: &Ctx, s: &HcurveSpec) -> Result<Plan, ConfigError> {
    s.model.validate().map_err(|e| ctx.err("model", e))?;
    s.model.mean().map_err(|e| ctx.err("model", e))?;
    let set = ctx.ruin_set(&s.ruin_set)?;
    if set.dim() != s.model.dim() || s.c.len() != s.model.dim() {
        return Err(ctx.err("c", "model, ruin set and c dimensions differ"));
    }
    if s.c.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(ctx.err("c", "safety loading must be componentwise positive"));
    }
    ctx.grid("levels", &s.levels, 0.0)?;
    ctx.positive("n", s.n)?;
    if s.method == HMethod::Quadrature && set.family().is_none() {
        return Err(ctx.err("method", "quadrature needs an explicit hyperplane family"));
    }
    Ok(Plan::Hcurve { model: s.model.clone(), set, c: s.c.clone(), levels: s.levels.clone(), method: s.method, n: s.n })
}

fn ruin(ctx: &Ctx, s: &RuinSpec) -> Result<(RiskConfig, Vec<f64>, u64), ConfigError> {
    s.claims.validate().map_err(|e| ctx.err("claims", e))?;
    s.interarrival.validate().map_err(|e| ctx.err("interarrival", e))?;
    let key = match &s.solvency {
        Solvency::Bidask { .. } => "pi",
        _ => "solvency",
    };
    s.solvency.build(&s.allocation).map_err(|e| ctx.err(key, e))?;
    let risk = RiskConfig::new(
        s.claims.clone(),
        s.interarrival.clone(),
        s.premium.clone(),
        s.allocation.clone(),
        &s.solvency,
        s.horizon,
    )
    .map_err(|e| ctx.err("premium", e))?;
    ctx.grid("levels", &s.levels, 0.0)?;
    ctx.positive("n_paths", s.n_paths)?;
    Ok((risk, s.levels.clone(), s.n_paths))
}

fn geometry(ctx: &Ctx, s: &GeometrySpec) -> Result<Plan, ConfigError> {
    let set = ctx.ruin_set(&s.ruin_set)?;
    if s.points.iter().any(|p| p.len() != set.dim()) {
        return Err(ctx.err("points", "point dimension differs from the ruin set"));
    }
    ctx.grid("levels", &s.levels, 0.0)?;
    Ok(Plan::Geometry { set, points: s.points.clone(), levels: s.levels.clone() })
}

impl Plan {
    /// Human-readable summary printed by `--dry-run`.
    pub fn describe(&self) -> String {
        let set_line = |set: &RuinSet| match set.family() {
            Some(f) => format!("ruin set: {} direction(s) in dimension {}", f.directions().len(), f.dim()),
            None => format!("ruin set: bid-ask cone in dimension {} (LP evaluation)", set.dim()),
        };
        match self {
            Plan::Diagnose { model, set, n, levels, tests } => {
                let lv = match levels {
                    Levels::Fixed(l) => format!("levels {l:?}"),
                    Levels::Quantiles(q) => format!("levels at quantiles {q:?}"),
                };
                let names: Vec<&str> = tests.iter().map(DiagnosticTest::name).collect();
                format!("diagnose\nmodel dimension: {}\n{}\n{lv}\nsamples per test: {n}\ntests: {}", model.dim(), set_line(set), names.join(", "))
            }
            Plan::Hcurve { model, set, c, levels, method, n } => format!(
                "hcurve\nmodel dimension: {}\n{}\nc: {c:?}\nlevels: {levels:?}\nmethod: {method:?}\nmc samples: {n}",
                model.dim(),
                set_line(set)
            ),
            Plan::Ruin { risk, levels, n_paths } | Plan::Compare { risk, levels, n_paths } => format!(
                "{}\n{}\nloading c: {:?}\ngive-up distance: {}\nmax steps: {}\ncontinuation: {}\nlevels: {levels:?}\npaths: {n_paths}",
                if matches!(self, Plan::Ruin { .. }) { "ruin" } else { "compare" },
                set_line(&risk.ruin_set),
                risk.drift(),
                risk.give_up,
                risk.max_steps,
                risk.continuation
            ),
            Plan::Geometry { set, points, levels } => {
                format!("geometry\n{}\npoints: {}\nlevels: {levels:?}", set_line(set), points.len())
            }
        }
    }
}
