//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, DenseMatrix};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-8;

/// `min costᵀx  s.t.  eq_matrix x = eq_rhs,  ineq_matrix x ≤ ineq_rhs,  x ≥ lower`.
///
/// A lower bound of `−∞` makes the variable free.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLp {
    pub cost: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
}

impl GeneralLp {
    pub fn new(
        cost: Vec<f64>,
        eq_matrix: DenseMatrix,
        eq_rhs: Vec<f64>,
        ineq_matrix: DenseMatrix,
        ineq_rhs: Vec<f64>,
        lower: Vec<f64>,
    ) -> Result<Self> {
        let n = cost.len();
        if eq_matrix.cols() != n
            || ineq_matrix.cols() != n
            || eq_matrix.rows() != eq_rhs.len()
            || ineq_matrix.rows() != ineq_rhs.len()
            || lower.len() != n
        {
            return Err(Error::Dimension("general LP data".into()));
        }
        if lower.iter().any(|&l| l.is_nan() || l == f64::INFINITY)
            || cost.iter().chain(&eq_rhs).chain(&ineq_rhs).any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("general LP data"));
        }
        Ok(Self {
            cost,
            eq_matrix,
            eq_rhs,
            ineq_matrix,
            ineq_rhs,
            lower,
        })
    }

    /// All variables free, no constraints yet.
    pub fn free(cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            cost,
            eq_matrix: DenseMatrix::zeros(0, n),
            eq_rhs: vec![],
            ineq_matrix: DenseMatrix::zeros(0, n),
            ineq_rhs: vec![],
            lower: vec![f64::NEG_INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.eq_matrix = append_row(&self.eq_matrix, row);
        self.eq_rhs.push(rhs);
    }

    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        self.ineq_matrix = append_row(&self.ineq_matrix, row);
        self.ineq_rhs.push(rhs);
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.cost, x)
    }

    /// Maximum violation of any constraint at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let eq = self.eq_matrix.mul_vec(x);
        let ub = self.ineq_matrix.mul_vec(x);
        let mut v: f64 = 0.0;
        for (lhs, rhs) in eq.iter().zip(&self.eq_rhs) {
            v = v.max((lhs - rhs).abs());
        }
        for (lhs, rhs) in ub.iter().zip(&self.ineq_rhs) {
            v = v.max(lhs - rhs);
        }
        for (xj, lj) in x.iter().zip(&self.lower) {
            v = v.max(lj - xj);
        }
        v
    }
}

fn append_row(m: &DenseMatrix, row: &[f64]) -> DenseMatrix {
    let extra = DenseMatrix::new(1, row.len(), row.to_vec()).expect("finite row");
    m.vstack(&extra).expect("row length matches")
}

/// Optimal basic solution and its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Equality-row duals followed by inequality-row duals (the latter `≤ 0`).
    pub dual: Vec<f64>,
}

/// Column of the standard form `z ≥ 0` and how it maps back.
#[derive(Clone, Copy, Debug)]
enum Column {
    /// `x_j = lower_j + z`.
    Shifted(usize),
    /// Positive part of a free `x_j`.
    Plus(usize),
    /// Negative part of a free `x_j`.
    Minus(usize),
    Slack,
}

struct StandardForm {
    columns: Vec<Column>,
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    row_sign: Vec<f64>,
}

fn to_standard(lp: &GeneralLp) -> StandardForm {
    let n = lp.num_vars();
    let (me, mi) = (lp.eq_rhs.len(), lp.ineq_rhs.len());
    let rows = me + mi;
    let mut columns = Vec::new();
    for j in 0..n {
        if lp.lower[j].is_finite() {
            columns.push(Column::Shifted(j));
        } else {
            columns.push(Column::Plus(j));
            columns.push(Column::Minus(j));
        }
    }
    let nv = columns.len();
    columns.extend(std::iter::repeat_n(Column::Slack, mi));

    let coef = |r: usize, j: usize| {
        if r < me {
            lp.eq_matrix.get(r, j)
        } else {
            lp.ineq_matrix.get(r - me, j)
        }
    };
    let mut matrix = vec![vec![0.0; columns.len()]; rows];
    let mut rhs = vec![0.0; rows];
    for r in 0..rows {
        rhs[r] = if r < me { lp.eq_rhs[r] } else { lp.ineq_rhs[r - me] };
        for (c, col) in columns[..nv].iter().enumerate() {
            matrix[r][c] = match *col {
                Column::Shifted(j) | Column::Plus(j) => coef(r, j),
                Column::Minus(j) => -coef(r, j),
                Column::Slack => unreachable!(),
            };
        }
        for j in 0..n {
            if lp.lower[j].is_finite() {
                rhs[r] -= coef(r, j) * lp.lower[j];
            }
        }
        if r >= me {
            matrix[r][nv + r - me] = 1.0;
        }
    }
    let mut row_sign = vec![1.0; rows];
    for r in 0..rows {
        if rhs[r] < 0.0 {
            row_sign[r] = -1.0;
            rhs[r] = -rhs[r];
            matrix[r].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let cost = columns
        .iter()
        .map(|col| match *col {
            Column::Shifted(j) | Column::Plus(j) => lp.cost[j],
            Column::Minus(j) => -lp.cost[j],
            Column::Slack => 0.0,
        })
        .collect();
    StandardForm {
        columns,
        matrix,
        rhs,
        cost,
        row_sign,
    }
}

struct Tableau {
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    origin: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        self.rhs[r] /= p;
        let prow = self.t[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f != 0.0 {
                for (v, pv) in self.t[i].iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * prhs;
                self.t[i][c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self, cost: &[f64], allowed: &[bool], cap: usize) -> Result<Outcome> {
        let ncols = cost.len();
        for _ in 0..cap {
            let mut entering = None;
            for c in 0..ncols {
                if !allowed[c] || self.basis.contains(&c) {
                    continue;
                }
                let mut rc = cost[c];
                for (i, &bi) in self.basis.iter().enumerate() {
                    rc -= cost[bi] * self.t[i][c];
                }
                if rc < -COST_TOL {
                    entering = Some(c);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - 1e-12 * (1.0 + best)
                                || (ratio <= best + 1e-12 * (1.0 + best)
                                    && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(Error::IterationLimit {
            limit: cap,
            context: "simplex",
        })
    }
}

/// Runs phase one. Returns the tableau with an artificial-free basis, or
/// `None` when the constraints are infeasible.
fn phase_one(sf: &StandardForm) -> Result<Option<Tableau>> {
    let rows = sf.rhs.len();
    let nv = sf.columns.len();
    let mut t: Vec<Vec<f64>> = sf.matrix.clone();
    for (r, row) in t.iter_mut().enumerate() {
        row.extend((0..rows).map(|q| if q == r { 1.0 } else { 0.0 }));
    }
    let mut tab = Tableau {
        t,
        rhs: sf.rhs.clone(),
        basis: (nv..nv + rows).collect(),
        origin: (0..rows).collect(),
    };
    let cost: Vec<f64> = (0..nv + rows).map(|c| if c < nv { 0.0 } else { 1.0 }).collect();
    let allowed = vec![true; nv + rows];
    let cap = 200 * (nv + rows + 1) * (rows + 1);
    tab.run(&cost, &allowed, cap)?;
    let infeasibility: f64 = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&b, _)| b >= nv)
        .map(|(_, v)| v.abs())
        .sum();
    let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if infeasibility > PHASE1_TOL * scale {
        return Ok(None);
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= nv {
            let col = (0..nv)
                .filter(|c| !tab.basis.contains(c))
                .find(|&c| tab.t[r][c].abs() > PIVOT_TOL);
            match col {
                Some(c) => {
                    tab.pivot(r, c);
                    r += 1;
                }
                None => {
                    tab.t.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    tab.origin.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }
    for row in tab.t.iter_mut() {
        row.truncate(nv);
    }
    Ok(Some(tab))
}

/// Decides whether the constraints of `lp` admit a point.
pub fn feasibility(lp: &GeneralLp) -> Result<bool> {
    let sf = to_standard(lp);
    Ok(phase_one(&sf)?.is_some())
}

/// Solves `lp` to optimality.
pub fn simplex_solve(lp: &GeneralLp) -> Result<LpSolution> {
    let sf = to_standard(lp);
    let Some(mut tab) = phase_one(&sf)? else {
        return Err(Error::Infeasible);
    };
    let nv = sf.columns.len();
    let rows = tab.t.len();
    let cap = 200 * (nv + rows + 1) * (rows + 1);
    match tab.run(&sf.cost, &vec![true; nv], cap)? {
        Outcome::Unbounded => return Err(Error::UnboundedLp),
        Outcome::Optimal => {}
    }

    // recompute the basic solution and duals from the original data
    let bmat = DenseMatrix::from_fn(rows, rows, |i, q| sf.matrix[tab.origin[i]][tab.basis[q]]);
    let brhs: Vec<f64> = tab.origin.iter().map(|&o| sf.rhs[o]).collect();
    let zb = linalg::solve_consistent(&bmat, &brhs, 1e-7)?
        .solution
        .unwrap_or_else(|| tab.rhs.clone());
    let cb: Vec<f64> = tab.basis.iter().map(|&c| sf.cost[c]).collect();
    let yb = linalg::solve_consistent(&bmat.transpose(), &cb, 1e-7)?
        .solution
        .ok_or_else(|| Error::Precondition("singular simplex basis".into()))?;

    let mut z = vec![0.0; nv];
    for (q, &c) in tab.basis.iter().enumerate() {
        z[c] = zb[q];
    }
    let mut x: Vec<f64> = lp.lower.iter().map(|&l| if l.is_finite() { l } else { 0.0 }).collect();
    for (c, col) in sf.columns.iter().enumerate() {
        match *col {
            Column::Shifted(j) | Column::Plus(j) => x[j] += z[c],
            Column::Minus(j) => x[j] -= z[c],
            Column::Slack => {}
        }
    }
    let mut dual = vec![0.0; sf.rhs.len()];
    for (i, &o) in tab.origin.iter().enumerate() {
        dual[o] = yb[i] * sf.row_sign[o];
    }
    Ok(LpSolution {
        value: lp.objective(&x),
        x,
        dual,
    })
}
