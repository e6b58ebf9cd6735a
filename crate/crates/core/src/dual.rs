//! Dual update: the active-set method specialised to
//!
//! ```text
//!     min −sᵀy  s.t.  −A_{J_P}ᵀy = sign(x_{J_P}),  |A_jᵀy| ≤ 1 (j ∉ J_P),
//!                     s ⊙ y ≥ 0,  y = 0 off I_P
//! ```
//!
//! where `s = sign(Ax_k − b)`. The support of the iterate is `I_D` and the
//! active inequalities are the columns `J_D ∖ J_P`.

use crate::asm::{argmin, StandardLp, ACTIVE_TOL, SUPPORT_TOL, TIE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm_inf, DenseMatrix, IndexSet, SolveReport};
use crate::problem::{IndexSets, ProblemInstance};

const DIRECTION_TOL: f64 = 1e-9;
const MULTIPLIER_SOLVE_TOL: f64 = 1e-6;
const WARM_TOL: f64 = 1e-9;
const ZERO_STEP: f64 = 1e-14;

/// Input of one dual update.
#[derive(Clone, Debug)]
pub struct DualContext<'a> {
    pub inst: &'a ProblemInstance,
    pub x_k: Vec<f64>,
    /// Uses `j_p`, `i_p`, `primal_signs` and `residual_signs`.
    pub sets: IndexSets,
    /// Feasible start, length `m`, zero off `I_P`.
    pub y_start: Vec<f64>,
    /// Direction `ê` from the preceding primal update, length `m`.
    pub warm_direction: Option<Vec<f64>>,
}

impl DualContext<'_> {
    /// `s` expanded to length `m` (zero off `I_P`).
    pub fn signs(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.inst.rows()];
        for (q, i) in self.sets.i_p.iter().enumerate() {
            s[i] = self.sets.residual_signs[q];
        }
        s
    }

    /// Objective `−sᵀy`.
    pub fn objective(&self, y: &[f64]) -> f64 {
        -dot(&self.signs(), y)
    }

    /// Maximum violation of the dual update constraints at `y`.
    pub fn violation(&self, y: &[f64]) -> f64 {
        let g = self.inst.a.tr_mul_vec(y);
        let s = self.signs();
        let mut v: f64 = 0.0;
        for (q, j) in self.sets.j_p.iter().enumerate() {
            v = v.max((-g[j] - self.sets.primal_signs[q]).abs());
        }
        for gj in &g {
            v = v.max(gj.abs() - 1.0);
        }
        for i in 0..y.len() {
            if self.sets.i_p.contains(i) {
                v = v.max(-s[i] * y[i]);
            } else {
                v = v.max(y[i].abs());
            }
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.inst.rows(), self.inst.cols());
        if self.x_k.len() != n || self.y_start.len() != m {
            return Err(Error::Dimension("dual context vectors".into()));
        }
        if self.warm_direction.as_ref().is_some_and(|e| e.len() != m) {
            return Err(Error::Dimension("dual warm direction".into()));
        }
        if self.sets.i_p.is_empty() {
            return Err(Error::Precondition("no tight rows".into()));
        }
        if self.violation(&self.y_start) > 1e-8 {
            return Err(Error::InfeasibleStart(format!(
                "dual start violates constraints by {:e}",
                self.violation(&self.y_start)
            )));
        }
        Ok(())
    }
}

/// Outcome of a single dual step.
#[derive(Clone, Debug, PartialEq)]
pub struct DualStep {
    pub alpha: f64,
    pub psi: Vec<f64>,
    pub i_d: IndexSet,
    pub j_d: IndexSet,
    /// Columns that joined `J_D` in this step.
    pub new_active: IndexSet,
    /// Rows that left `I_D` in this step.
    pub leaving_support: IndexSet,
}

/// Multipliers of a dual iterate without a descent direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DualMultipliers {
    /// Length `n`, zero off `J_D`.
    pub d_hat: Vec<f64>,
    /// On `J_D ∖ J_P`, in increasing index order.
    pub mu: Vec<f64>,
    /// On `I_P ∖ I_D`, in increasing index order.
    pub nu: Vec<f64>,
}

impl DualMultipliers {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.mu.iter().chain(&self.nu).all(|&v| v >= -tol)
    }
}

/// Result of [`dual_update`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualResult {
    /// Length `m`, zero off `I_P`.
    pub y: Vec<f64>,
    /// Final `d̂`, length `n`.
    pub d_hat: Vec<f64>,
    pub i_d: IndexSet,
    pub j_d: IndexSet,
    pub iterations: usize,
}

#[derive(Default)]
pub struct DualOptions<'a> {
    pub max_iters: Option<usize>,
    /// Receives every iterate `ψ`.
    pub observer: Option<&'a mut dyn FnMut(&[f64])>,
}

/// Solves `(A^{I_D}_{J_D})ᵀe = 0, sᵀe = 1` for `e` supported on `I_D`.
pub fn dual_direction(ctx: &DualContext<'_>, i_d: &IndexSet, j_d: &IndexSet) -> Result<SolveReport> {
    let rows = i_d.as_slice();
    let s = ctx.signs();
    let mut sys = ctx.inst.a.select(rows, j_d.as_slice()).transpose();
    let srow = DenseMatrix::from_fn(1, rows.len(), |_, q| s[rows[q]]);
    sys = sys.vstack(&srow)?;
    let mut rhs = vec![0.0; sys.rows()];
    *rhs.last_mut().expect("sign row") = 1.0;
    let report = linalg::solve_consistent(&sys, &rhs, DIRECTION_TOL)?;
    Ok(SolveReport {
        solution: report.solution.map(|sol| {
            let mut e = vec![0.0; ctx.inst.rows()];
            for (q, &i) in rows.iter().enumerate() {
                e[i] = sol[q];
            }
            e
        }),
        ..report
    })
}

fn direction_tol(e: &[f64]) -> f64 {
    DIRECTION_TOL * (1.0 + norm_inf(e))
}

/// Largest feasible step from `psi` along `e`, ignoring degenerate-step history.
pub fn dual_step(
    ctx: &DualContext<'_>,
    e: &[f64],
    psi: &[f64],
    i_d: &IndexSet,
    j_d: &IndexSet,
) -> Result<DualStep> {
    let none_m = IndexSet::empty(ctx.inst.rows());
    let none_n = IndexSet::empty(ctx.inst.cols());
    step_with_ledger(ctx, e, psi, i_d, j_d, &none_n, &none_m, &[])
}

#[allow(clippy::too_many_arguments)]
fn step_with_ledger(
    ctx: &DualContext<'_>,
    e: &[f64],
    psi: &[f64],
    i_d: &IndexSet,
    j_d: &IndexSet,
    removed: &IndexSet,
    added: &IndexSet,
    removed_side: &[f64],
) -> Result<DualStep> {
    let s = ctx.signs();
    let g = ctx.inst.a.tr_mul_vec(psi);
    let a = ctx.inst.a.tr_mul_vec(e);
    let dtol = direction_tol(e);
    let mut ratios: Vec<(f64, bool, usize)> = Vec::new();
    for j in j_d.complement().iter() {
        if a[j].abs() <= dtol * (1.0 + ctx.inst.a.col(j).iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            continue;
        }
        let side = a[j].signum();
        let slack = if removed.contains(j) && removed_side[j] == side {
            0.0
        } else {
            (1.0 - side * g[j]).max(0.0)
        };
        ratios.push((slack / a[j].abs(), true, j));
    }
    for i in i_d.iter() {
        if s[i] * e[i] < -dtol {
            let val = if added.contains(i) { 0.0 } else { (s[i] * psi[i]).max(0.0) };
            ratios.push((val / (s[i] * e[i]).abs(), false, i));
        }
    }
    let alpha = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    if !alpha.is_finite() {
        return Err(Error::Unbounded("dual update has no blocking constraint".into()));
    }
    let window = alpha + TIE_TOL * (1.0 + alpha);
    let mut new_active = IndexSet::empty(ctx.inst.cols());
    let mut leaving = IndexSet::empty(ctx.inst.rows());
    for (r, is_col, idx) in ratios {
        if r <= window {
            if is_col {
                new_active.insert(idx);
            } else {
                leaving.insert(idx);
            }
        }
    }
    let mut psi_next = psi.to_vec();
    if alpha > ZERO_STEP {
        linalg::axpy(alpha, e, &mut psi_next);
    }
    for i in leaving.iter() {
        psi_next[i] = 0.0;
    }
    Ok(DualStep {
        alpha,
        psi: psi_next,
        i_d: i_d.difference(&leaving),
        j_d: j_d.union(&new_active),
        new_active,
        leaving_support: leaving,
    })
}

/// `d̂` from `A^{I_D}_{J_D} d̂ = −s_{I_D}`, then `μ` on `J_D ∖ J_P` and `ν` on `I_P ∖ I_D`.
pub fn dual_multipliers(
    ctx: &DualContext<'_>,
    psi: &[f64],
    i_d: &IndexSet,
    j_d: &IndexSet,
) -> Result<DualMultipliers> {
    let s = ctx.signs();
    let cols = j_d.as_slice();
    let sys = ctx.inst.a.select(i_d.as_slice(), cols);
    let rhs: Vec<f64> = i_d.iter().map(|i| -s[i]).collect();
    let report = linalg::solve_consistent(&sys, &rhs, MULTIPLIER_SOLVE_TOL)?;
    let sol = report.solution.ok_or_else(|| {
        Error::InconsistentMultipliers(format!(
            "dual multiplier system residual {:e}",
            report.residual_norm
        ))
    })?;
    let mut d_hat = vec![0.0; ctx.inst.cols()];
    for (q, &j) in cols.iter().enumerate() {
        d_hat[j] = sol[q];
    }
    let g = ctx.inst.a.tr_mul_vec(psi);
    let mu = j_d
        .difference(&ctx.sets.j_p)
        .iter()
        .map(|j| -g[j].signum() * d_hat[j])
        .collect();
    let nu = ctx
        .sets
        .i_p
        .difference(i_d)
        .iter()
        .map(|i| -s[i] * dot(ctx.inst.a.row(i), &d_hat) - 1.0)
        .collect();
    Ok(DualMultipliers { d_hat, mu, nu })
}

pub fn dual_update(ctx: &DualContext<'_>) -> Result<DualResult> {
    dual_update_with(ctx, DualOptions::default())
}

pub fn dual_update_with(ctx: &DualContext<'_>, mut opts: DualOptions<'_>) -> Result<DualResult> {
    ctx.validate()?;
    let (m, n) = (ctx.inst.rows(), ctx.inst.cols());
    let np = ctx.sets.j_p.len();
    let cap = opts
        .max_iters
        .unwrap_or(50 * (ctx.sets.i_p.len() + 2 * (n - np) + np).max(1));

    let mut psi = ctx.y_start.clone();
    let g = ctx.inst.a.tr_mul_vec(&psi);
    let mut i_d = IndexSet::from_predicate(m, |i| ctx.sets.i_p.contains(i) && psi[i].abs() > SUPPORT_TOL);
    for i in i_d.complement().iter() {
        psi[i] = 0.0;
    }
    let mut j_d = IndexSet::from_predicate(n, |j| {
        ctx.sets.j_p.contains(j) || g[j].abs() >= 1.0 - ACTIVE_TOL
    });
    let mut removed = IndexSet::empty(n);
    let mut added = IndexSet::empty(m);
    // side of the bound each removed column sat on
    let mut removed_side = vec![0.0; n];

    let mut pending = ctx
        .warm_direction
        .as_ref()
        .and_then(|e_hat| warm_start(ctx, e_hat, &psi, &mut i_d, &mut j_d, &mut removed, &mut added, &mut removed_side));
    let opt_scale = 1e-9;

    for iteration in 1..=cap {
        let direction = match pending.take() {
            Some(e) => Some(e),
            None => dual_direction(ctx, &i_d, &j_d)?.solution,
        };
        match direction {
            Some(e) => {
                let step = step_with_ledger(ctx, &e, &psi, &i_d, &j_d, &removed, &added, &removed_side)?;
                let zero = step.alpha <= ZERO_STEP;
                psi = step.psi;
                i_d = step.i_d;
                j_d = step.j_d;
                if zero {
                    removed = removed.difference(&step.new_active);
                    added = added.difference(&step.leaving_support);
                } else {
                    if removed.len() + added.len() > 1 {
                        let a = ctx.inst.a.tr_mul_vec(&e);
                        let dtol = direction_tol(&e);
                        for j in removed.iter() {
                            if a[j].abs() <= dtol {
                                j_d.insert(j);
                            }
                        }
                        for i in added.iter() {
                            if e[i].abs() <= dtol {
                                i_d.remove(i);
                                psi[i] = 0.0;
                            }
                        }
                    }
                    removed.clear();
                    added.clear();
                }
            }
            None => {
                let mult = dual_multipliers(ctx, &psi, &i_d, &j_d)?;
                let tol = opt_scale * (1.0 + norm_inf(&mult.d_hat));
                let worst_mu = argmin(&mult.mu);
                let worst_nu = argmin(&mult.nu);
                let mu_val = worst_mu.map_or(f64::INFINITY, |w| w.1);
                let nu_val = worst_nu.map_or(f64::INFINITY, |w| w.1);
                if mu_val >= -tol && nu_val >= -tol {
                    return Ok(DualResult {
                        y: psi,
                        d_hat: mult.d_hat,
                        i_d,
                        j_d,
                        iterations: iteration,
                    });
                }
                if mu_val < nu_val {
                    let j = j_d.difference(&ctx.sets.j_p).as_slice()[worst_mu.expect("finite").0];
                    removed_side[j] = ctx.inst.a.col_dot(j, &psi).signum();
                    j_d.remove(j);
                    removed.insert(j);
                } else {
                    let i = ctx.sets.i_p.difference(&i_d).as_slice()[worst_nu.expect("finite").0];
                    i_d.insert(i);
                    added.insert(i);
                }
            }
        }
        if let Some(obs) = opts.observer.as_mut() {
            obs(&psi);
        }
    }
    Err(Error::IterationLimit {
        limit: cap,
        context: "dual update",
    })
}

/// Applies the a-priori set updates implied by `ê` and returns it as the
/// first direction, or `None` (leaving the sets untouched) if `ê` does not
/// solve the direction system for the updated sets.
#[allow(clippy::too_many_arguments)]
fn warm_start(
    ctx: &DualContext<'_>,
    e_hat: &[f64],
    psi: &[f64],
    i_d: &mut IndexSet,
    j_d: &mut IndexSet,
    removed: &mut IndexSet,
    added: &mut IndexSet,
    removed_side: &mut [f64],
) -> Option<Vec<f64>> {
    if e_hat
        .iter()
        .enumerate()
        .any(|(i, v)| !ctx.sets.i_p.contains(i) && v.abs() > WARM_TOL)
    {
        return None;
    }
    let new_rows: Vec<usize> = ctx
        .sets
        .i_p
        .difference(i_d)
        .iter()
        .filter(|&i| e_hat[i].abs() > WARM_TOL)
        .collect();
    let a = ctx.inst.a.tr_mul_vec(e_hat);
    let drop_cols: Vec<usize> = j_d
        .difference(&ctx.sets.j_p)
        .iter()
        .filter(|&j| a[j].abs() > WARM_TOL)
        .collect();
    let mut cand_i = i_d.clone();
    let mut cand_j = j_d.clone();
    new_rows.iter().for_each(|&i| {
        cand_i.insert(i);
    });
    drop_cols.iter().for_each(|&j| {
        cand_j.remove(j);
    });
    let mut e = vec![0.0; e_hat.len()];
    for i in cand_i.iter() {
        e[i] = e_hat[i];
    }
    let s = ctx.signs();
    let tol = 1e-7 * (1.0 + norm_inf(&e));
    let solves = cand_j.iter().all(|j| ctx.inst.a.col_dot(j, &e).abs() <= tol)
        && (dot(&s, &e) - 1.0).abs() <= tol;
    if !solves {
        return None;
    }
    let g = ctx.inst.a.tr_mul_vec(psi);
    for &j in &drop_cols {
        removed_side[j] = g[j].signum();
        removed.insert(j);
    }
    for &i in &new_rows {
        added.insert(i);
    }
    *i_d = cand_i;
    *j_d = cand_j;
    Some(e)
}

/// The same LP in the generic structured form, with variables `y_{I_P}`.
///
/// Returns the LP and the start point `y_start` restricted to `I_P`.
pub fn dual_standard_lp(ctx: &DualContext<'_>) -> Result<(StandardLp, Vec<f64>)> {
    let rows = ctx.sets.i_p.as_slice();
    let jp = ctx.sets.j_p.as_slice();
    let jc = ctx.sets.j_p.complement();
    let s = ctx.signs();
    let p = rows.len();
    let a_eq = DenseMatrix::from_fn(jp.len(), p, |r, q| -ctx.inst.a.get(rows[q], jp[r]));
    let k = jc.len();
    let d = DenseMatrix::from_fn(2 * k, p, |r, q| {
        let j = jc.as_slice()[r % k];
        let v = ctx.inst.a.get(rows[q], j);
        if r < k {
            v
        } else {
            -v
        }
    });
    let lp = StandardLp::new(
        rows.iter().map(|&i| -s[i]).collect(),
        a_eq,
        ctx.sets.primal_signs.clone(),
        d,
        vec![-1.0; 2 * k],
        rows.iter().map(|&i| s[i]).collect(),
    )?;
    let y0 = rows.iter().map(|&i| ctx.y_start[i]).collect();
    Ok((lp, y0))
}
