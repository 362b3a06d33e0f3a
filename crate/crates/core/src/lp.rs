//! Dense two-phase simplex for small linear programs.
//!
//! Solves `min cᵀx` subject to rows `aᵀx (≤ | ≥ | =) b` and `x ≥ 0`.
//! Pivoting follows Bland's rule, which cannot cycle, and every comparison
//! against zero uses the absolute tolerance [`TOL`].

use crate::{Error, Result};

pub const TOL: f64 = 1e-9;
const MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Minimizes over columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_ITER {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -TOL) else {
                return Ok(true);
            };
            let rhs = self.width;
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > TOL {
                    let ratio = row[rhs] / row[c];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - TOL || (ratio <= br + TOL && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }
}

/// Solves the program. Errors only on malformed input or iteration overflow.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.coeffs.len() });
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite LP coefficient".into()));
        }
    }
    let m = lp.constraints.len();

    // Orient rows so that every right-hand side is nonnegative.
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = n + n_slack;
    let width = art_start + n_art;

    let mut t = Tableau {
        rows: vec![vec![0.0; width + 1]; m],
        obj: vec![0.0; width + 1],
        basis: vec![0; m],
        width,
    };
    let (mut s, mut a) = (n, art_start);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t.rows[i][..n].copy_from_slice(coeffs);
        t.rows[i][width] = *rhs;
        match rel {
            Relation::Le => {
                t.rows[i][s] = 1.0;
                t.basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t.rows[i][s] = -1.0;
                s += 1;
                t.rows[i][a] = 1.0;
                t.basis[i] = a;
                a += 1;
            }
            Relation::Eq => {
                t.rows[i][a] = 1.0;
                t.basis[i] = a;
                a += 1;
            }
        }
    }

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        for j in art_start..width {
            t.obj[j] = 1.0;
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                for j in 0..=width {
                    t.obj[j] -= t.rows[i][j];
                }
            }
        }
        t.optimize(width)?;
        if -t.obj[width] > TOL * (1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max)) {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| t.rows[i][j].abs() > TOL) {
                    t.pivot(i, c);
                } else {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    // Phase 2.
    t.obj = vec![0.0; width + 1];
    t.obj[..n].copy_from_slice(&lp.objective);
    for i in 0..t.rows.len() {
        let cb = t.obj[t.basis[i]];
        if cb != 0.0 {
            for j in 0..=width {
                t.obj[j] -= cb * t.rows[i][j];
            }
        }
    }
    if !t.optimize(art_start)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][width];
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, value })
}
