//! Primal update: the active-set method specialised to
//!
//! ```text
//!     max t  s.t.  A^{I_D}x − b_{I_D} = (δᵏ − t) sign(y_{I_D})
//!                  |A^i x − bᵢ| ≤ δᵏ − t        (i ∉ I_D)
//!                  (Aᵀy) ⊙ x ≤ 0,  x = 0 off J_D,  t ≤ δᵏ − δ
//! ```
//!
//! The active rows are `I_P` (always containing `I_D`), the support is
//! `J_P ⊆ J_D`, and `t` never leaves the support.

use crate::asm::{argmin, StandardLp, TIE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm_inf, DenseMatrix, IndexSet, SolveReport};
use crate::problem::{IndexSets, ProblemInstance};

const DIRECTION_TOL: f64 = 1e-9;
const MULTIPLIER_SOLVE_TOL: f64 = 1e-6;
const WARM_TOL: f64 = 1e-9;
const ZERO_STEP: f64 = 1e-14;

/// Input of one primal update.
#[derive(Clone, Debug)]
pub struct PrimalContext<'a> {
    pub inst: &'a ProblemInstance,
    /// Fresh dual certificate, length `m`.
    pub y_next: Vec<f64>,
    pub delta_k: f64,
    pub delta_target: f64,
    /// Start point, length `n`, zero off `J_D`.
    pub x_start: Vec<f64>,
    /// `j_p`, `i_p`, `residual_signs` at the start point; `j_d`, `i_d`,
    /// `dual_signs` from `y_next`.
    pub sets: IndexSets,
    /// `d̂` from the preceding dual update, length `n`.
    pub warm_direction: Option<Vec<f64>>,
}

impl PrimalContext<'_> {
    /// Maximum violation of the update constraints at `(x, t)`.
    pub fn violation(&self, x: &[f64], t: f64) -> f64 {
        let r = self.inst.residual(x);
        let g = self.inst.a.tr_mul_vec(&self.y_next);
        let bound = self.delta_k - t;
        let mut v: f64 = (t - (self.delta_k - self.delta_target)).max(0.0);
        for i in 0..r.len() {
            match self.sets.i_d.position(i) {
                Some(q) => v = v.max((r[i] - bound * self.sets.dual_signs[q]).abs()),
                None => v = v.max(r[i].abs() - bound),
            }
        }
        for j in 0..x.len() {
            if self.sets.j_d.contains(j) {
                v = v.max(g[j] * x[j]);
            } else {
                v = v.max(x[j].abs());
            }
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.inst.rows(), self.inst.cols());
        if self.y_next.len() != m || self.x_start.len() != n {
            return Err(Error::Dimension("primal context vectors".into()));
        }
        if self.warm_direction.as_ref().is_some_and(|d| d.len() != n) {
            return Err(Error::Dimension("primal warm direction".into()));
        }
        if self.delta_target > self.delta_k {
            return Err(Error::Precondition(format!(
                "target {} above current parameter {}",
                self.delta_target, self.delta_k
            )));
        }
        if !self.sets.i_d.is_subset(&self.sets.i_p) || !self.sets.j_p.is_subset(&self.sets.j_d) {
            return Err(Error::Precondition("index sets not nested".into()));
        }
        let viol = self.violation(&self.x_start, 0.0);
        if viol > 1e-8 * (1.0 + self.delta_k) {
            return Err(Error::InfeasibleStart(format!(
                "primal start violates constraints by {viol:e}"
            )));
        }
        Ok(())
    }
}

/// Outcome of a single primal step.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalStep {
    pub alpha: f64,
    pub reached_target: bool,
    pub xi: Vec<f64>,
    pub tau: f64,
    pub i_p: IndexSet,
    pub j_p: IndexSet,
    /// Rows that joined `I_P`, with the side (`±1`) they hit.
    pub new_active: Vec<(usize, f64)>,
    pub leaving_support: IndexSet,
}

/// Multipliers of a primal iterate without an ascent direction.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalMultipliers {
    /// Length `m`, zero off `I_P`.
    pub e_hat: Vec<f64>,
    /// On `I_P ∖ I_D`, in increasing index order.
    pub mu: Vec<f64>,
    /// On `J_D ∖ J_P`, in increasing index order.
    pub nu: Vec<f64>,
}

impl PrimalMultipliers {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.mu.iter().chain(&self.nu).all(|&v| v >= -tol)
    }
}

/// Result of [`primal_update`].
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalResult {
    pub x: Vec<f64>,
    pub t: f64,
    /// Final `ê`, absent when the run stopped at the target.
    pub e_hat: Option<Vec<f64>>,
    pub i_p: IndexSet,
    pub j_p: IndexSet,
    pub reached_target: bool,
    pub iterations: usize,
}

#[derive(Default)]
pub struct PrimalOptions<'a> {
    pub max_iters: Option<usize>,
    /// Receives every iterate `(ξ, τ)`.
    pub observer: Option<&'a mut dyn FnMut(&[f64], f64)>,
}

/// Row signs `r` on `I_P`: `sign(y)` on `I_D`, otherwise the side that is tight.
fn row_signs(ctx: &PrimalContext<'_>, i_p: &IndexSet, side: &[f64]) -> Vec<f64> {
    i_p.iter()
        .map(|i| match ctx.sets.i_d.position(i) {
            Some(q) => ctx.sets.dual_signs[q],
            None => side[i],
        })
        .collect()
}

fn initial_sides(ctx: &PrimalContext<'_>) -> Vec<f64> {
    let mut side = vec![0.0; ctx.inst.rows()];
    for (q, i) in ctx.sets.i_p.iter().enumerate() {
        side[i] = ctx.sets.residual_signs[q];
    }
    side
}

/// Solves `A^{I_P}_{J_P} d = −r` for `d` supported on `J_P` (`d_t = 1` implied).
pub fn primal_direction(
    ctx: &PrimalContext<'_>,
    i_p: &IndexSet,
    j_p: &IndexSet,
    side: &[f64],
) -> Result<SolveReport> {
    let sys = ctx.inst.a.select(i_p.as_slice(), j_p.as_slice());
    let rhs: Vec<f64> = row_signs(ctx, i_p, side).iter().map(|r| -r).collect();
    let report = linalg::solve_consistent(&sys, &rhs, DIRECTION_TOL)?;
    Ok(SolveReport {
        solution: report.solution.map(|sol| {
            let mut d = vec![0.0; ctx.inst.cols()];
            for (q, j) in j_p.iter().enumerate() {
                d[j] = sol[q];
            }
            d
        }),
        ..report
    })
}

fn direction_tol(d: &[f64]) -> f64 {
    DIRECTION_TOL * (1.0 + norm_inf(d))
}

/// Largest feasible step from `(ξ, τ)` along `(d, 1)`, ignoring degenerate-step history.
pub fn primal_step(
    ctx: &PrimalContext<'_>,
    d: &[f64],
    xi: &[f64],
    tau: f64,
    i_p: &IndexSet,
    j_p: &IndexSet,
) -> Result<PrimalStep> {
    let ledger = Ledger {
        removed: IndexSet::empty(ctx.inst.rows()),
        added: IndexSet::empty(ctx.inst.cols()),
    };
    step_with_ledger(ctx, d, xi, tau, i_p, j_p, &ledger, &initial_sides(ctx))
}

struct Ledger {
    removed: IndexSet,
    added: IndexSet,
}

#[allow(clippy::too_many_arguments)]
fn step_with_ledger(
    ctx: &PrimalContext<'_>,
    d: &[f64],
    xi: &[f64],
    tau: f64,
    i_p: &IndexSet,
    j_p: &IndexSet,
    ledger: &Ledger,
    side: &[f64],
) -> Result<PrimalStep> {
    let bound = ctx.delta_k - tau;
    let rho = ctx.inst.residual(xi);
    let gd = ctx.inst.a.mul_vec(d);
    let gy = ctx.inst.a.tr_mul_vec(&ctx.y_next);
    let dtol = direction_tol(d);

    // (ratio, row or column, index, side)
    let mut ratios: Vec<(f64, bool, usize, f64)> = Vec::new();
    for i in i_p.complement().iter() {
        let scale = 1.0 + norm_inf(ctx.inst.a.row(i));
        for sgn in [1.0, -1.0] {
            // sgn·(ρ + αg) ≤ bound − α
            let rate = sgn * gd[i] + 1.0;
            if rate > dtol * scale {
                let slack = if ledger.removed.contains(i) && side[i] == sgn {
                    0.0
                } else {
                    (bound - sgn * rho[i]).max(0.0)
                };
                ratios.push((slack / rate, true, i, sgn));
            }
        }
    }
    for j in j_p.iter() {
        let rate = gy[j] * d[j];
        if rate > dtol {
            let val = if ledger.added.contains(j) { 0.0 } else { (-gy[j] * xi[j]).max(0.0) };
            ratios.push((val / rate, false, j, 0.0));
        }
    }
    let alpha_block = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let alpha_target = (ctx.delta_k - tau - ctx.delta_target).max(0.0);
    let reached_target = alpha_target <= alpha_block + TIE_TOL * (1.0 + alpha_block);
    let alpha = if reached_target { alpha_target } else { alpha_block };
    if !alpha.is_finite() {
        return Err(Error::Unbounded("primal update has no blocking constraint".into()));
    }

    let mut xi_next = xi.to_vec();
    let mut tau_next = tau;
    if alpha > ZERO_STEP {
        linalg::axpy(alpha, d, &mut xi_next);
        tau_next += alpha;
    }
    let mut i_next = i_p.clone();
    let mut j_next = j_p.clone();
    let mut new_active = Vec::new();
    let mut leaving = IndexSet::empty(ctx.inst.cols());
    if !reached_target {
        let window = alpha + TIE_TOL * (1.0 + alpha);
        for (r, is_row, idx, sgn) in ratios {
            if r > window {
                continue;
            }
            if is_row {
                if i_next.insert(idx) {
                    new_active.push((idx, sgn));
                }
            } else {
                leaving.insert(idx);
                j_next.remove(idx);
                xi_next[idx] = 0.0;
            }
        }
    }
    Ok(PrimalStep {
        alpha,
        reached_target,
        xi: xi_next,
        tau: tau_next,
        i_p: i_next,
        j_p: j_next,
        new_active,
        leaving_support: leaving,
    })
}

/// `ê` from `(A^{I_P}_{J_P})ᵀê = 0, rᵀê = 1`, then `μ` on `I_P ∖ I_D` and `ν` on `J_D ∖ J_P`.
pub fn primal_multipliers(
    ctx: &PrimalContext<'_>,
    i_p: &IndexSet,
    j_p: &IndexSet,
    side: &[f64],
) -> Result<PrimalMultipliers> {
    let rows = i_p.as_slice();
    let r = row_signs(ctx, i_p, side);
    let sys = ctx
        .inst
        .a
        .select(rows, j_p.as_slice())
        .transpose()
        .vstack(&DenseMatrix::from_fn(1, rows.len(), |_, q| r[q]))?;
    let mut rhs = vec![0.0; sys.rows()];
    *rhs.last_mut().expect("sign row") = 1.0;
    let report = linalg::solve_consistent(&sys, &rhs, MULTIPLIER_SOLVE_TOL)?;
    let sol = report.solution.ok_or_else(|| {
        Error::InconsistentMultipliers(format!(
            "primal multiplier system residual {:e}",
            report.residual_norm
        ))
    })?;
    let mut e_hat = vec![0.0; ctx.inst.rows()];
    for (q, &i) in rows.iter().enumerate() {
        e_hat[i] = sol[q];
    }
    let mu = i_p
        .difference(&ctx.sets.i_d)
        .iter()
        .map(|i| r[i_p.position(i).expect("member")] * e_hat[i])
        .collect();
    let gy = ctx.inst.a.tr_mul_vec(&ctx.y_next);
    let nu = ctx
        .sets
        .j_d
        .difference(j_p)
        .iter()
        .map(|j| -gy[j].signum() * ctx.inst.a.col_dot(j, &e_hat))
        .collect();
    Ok(PrimalMultipliers { e_hat, mu, nu })
}

pub fn primal_update(ctx: &PrimalContext<'_>) -> Result<PrimalResult> {
    primal_update_with(ctx, PrimalOptions::default())
}

pub fn primal_update_with(ctx: &PrimalContext<'_>, mut opts: PrimalOptions<'_>) -> Result<PrimalResult> {
    ctx.validate()?;
    let (m, n) = (ctx.inst.rows(), ctx.inst.cols());
    let nd = ctx.sets.j_d.len();
    let cap = opts
        .max_iters
        .unwrap_or(50 * (nd + 1 + 2 * m + 1).max(1));

    let mut xi = ctx.x_start.clone();
    let mut tau = 0.0;
    let mut i_p = ctx.sets.i_p.clone();
    let mut j_p = ctx.sets.j_p.clone();
    let mut side = initial_sides(ctx);
    let mut ledger = Ledger {
        removed: IndexSet::empty(m),
        added: IndexSet::empty(n),
    };
    let mut pending = ctx
        .warm_direction
        .as_ref()
        .and_then(|d_hat| warm_start(ctx, d_hat, &mut i_p, &mut j_p, &side, &mut ledger));

    for iteration in 1..=cap {
        let direction = match pending.take() {
            Some(d) => Some(d),
            None => primal_direction(ctx, &i_p, &j_p, &side)?.solution,
        };
        match direction {
            Some(d) => {
                let step = step_with_ledger(ctx, &d, &xi, tau, &i_p, &j_p, &ledger, &side)?;
                xi = step.xi;
                tau = step.tau;
                if step.reached_target {
                    notify(&mut opts, &xi, tau);
                    return Ok(PrimalResult {
                        x: xi,
                        t: tau,
                        e_hat: None,
                        i_p,
                        j_p,
                        reached_target: true,
                        iterations: iteration,
                    });
                }
                i_p = step.i_p;
                j_p = step.j_p;
                for &(i, sgn) in &step.new_active {
                    side[i] = sgn;
                }
                if step.alpha <= ZERO_STEP {
                    for &(i, _) in &step.new_active {
                        ledger.removed.remove(i);
                    }
                    ledger.added = ledger.added.difference(&step.leaving_support);
                } else {
                    if ledger.removed.len() + ledger.added.len() > 1 {
                        let gd = ctx.inst.a.mul_vec(&d);
                        let dtol = direction_tol(&d);
                        for i in ledger.removed.iter() {
                            if (side[i] * gd[i] + 1.0).abs() <= dtol {
                                i_p.insert(i);
                            }
                        }
                        for j in ledger.added.iter() {
                            if d[j].abs() <= dtol {
                                j_p.remove(j);
                                xi[j] = 0.0;
                            }
                        }
                    }
                    ledger.removed.clear();
                    ledger.added.clear();
                }
            }
            None => {
                let mult = primal_multipliers(ctx, &i_p, &j_p, &side)?;
                let tol = 1e-9 * (1.0 + norm_inf(&mult.e_hat));
                let worst_mu = argmin(&mult.mu);
                let worst_nu = argmin(&mult.nu);
                let mu_val = worst_mu.map_or(f64::INFINITY, |w| w.1);
                let nu_val = worst_nu.map_or(f64::INFINITY, |w| w.1);
                if mu_val >= -tol && nu_val >= -tol {
                    notify(&mut opts, &xi, tau);
                    return Ok(PrimalResult {
                        x: xi,
                        t: tau,
                        e_hat: Some(mult.e_hat),
                        i_p,
                        j_p,
                        reached_target: false,
                        iterations: iteration,
                    });
                }
                if mu_val < nu_val {
                    let i = i_p.difference(&ctx.sets.i_d).as_slice()[worst_mu.expect("finite").0];
                    i_p.remove(i);
                    ledger.removed.insert(i);
                } else {
                    let j = ctx.sets.j_d.difference(&j_p).as_slice()[worst_nu.expect("finite").0];
                    j_p.insert(j);
                    ledger.added.insert(j);
                }
            }
        }
        notify(&mut opts, &xi, tau);
    }
    Err(Error::IterationLimit {
        limit: cap,
        context: "primal update",
    })
}

fn notify(opts: &mut PrimalOptions<'_>, xi: &[f64], tau: f64) {
    if let Some(obs) = opts.observer.as_mut() {
        obs(xi, tau);
    }
}

/// Applies the a-priori set updates implied by `d̂` and returns it as the
/// first direction, or `None` (leaving the sets untouched) if `d̂` does not
/// solve the direction system for the updated sets.
fn warm_start(
    ctx: &PrimalContext<'_>,
    d_hat: &[f64],
    i_p: &mut IndexSet,
    j_p: &mut IndexSet,
    side: &[f64],
    ledger: &mut Ledger,
) -> Option<Vec<f64>> {
    if d_hat
        .iter()
        .enumerate()
        .any(|(j, v)| !ctx.sets.j_d.contains(j) && v.abs() > WARM_TOL)
    {
        return None;
    }
    let new_cols: Vec<usize> = ctx
        .sets
        .j_d
        .difference(j_p)
        .iter()
        .filter(|&j| d_hat[j].abs() > WARM_TOL)
        .collect();
    let gd = ctx.inst.a.mul_vec(d_hat);
    let drop_rows: Vec<usize> = i_p
        .difference(&ctx.sets.i_d)
        .iter()
        .filter(|&i| (gd[i] + side[i]).abs() > WARM_TOL)
        .collect();
    let mut cand_j = j_p.clone();
    let mut cand_i = i_p.clone();
    new_cols.iter().for_each(|&j| {
        cand_j.insert(j);
    });
    drop_rows.iter().for_each(|&i| {
        cand_i.remove(i);
    });
    let mut d = vec![0.0; d_hat.len()];
    for j in cand_j.iter() {
        d[j] = d_hat[j];
    }
    let r = row_signs(ctx, &cand_i, side);
    let tol = 1e-7 * (1.0 + norm_inf(&d));
    let solves = cand_i
        .iter()
        .zip(&r)
        .all(|(i, ri)| (dot(ctx.inst.a.row(i), &d) + ri).abs() <= tol);
    if !solves {
        return None;
    }
    for &i in &drop_rows {
        ledger.removed.insert(i);
    }
    for &j in &new_cols {
        ledger.added.insert(j);
    }
    *i_p = cand_i;
    *j_p = cand_j;
    Some(d)
}

/// The same LP in the generic structured form with variables `(x_{J_D}, t)`.
///
/// Returns the LP and the start point `(x_start on J_D, 0)`.
pub fn primal_standard_lp(ctx: &PrimalContext<'_>) -> Result<(StandardLp, Vec<f64>)> {
    let cols = ctx.sets.j_d.as_slice();
    let p = cols.len();
    let m = ctx.inst.rows();
    let i_d = ctx.sets.i_d.as_slice();
    let outside = ctx.sets.i_d.complement();
    let k = outside.len();
    let a_eq = DenseMatrix::from_fn(i_d.len(), p + 1, |r, q| {
        if q < p {
            ctx.inst.a.get(i_d[r], cols[q])
        } else {
            ctx.sets.dual_signs[r]
        }
    });
    let b_eq = i_d
        .iter()
        .enumerate()
        .map(|(r, &i)| ctx.delta_k * ctx.sets.dual_signs[r] + ctx.inst.b[i])
        .collect();
    // rows: upper sides, lower sides, then the target bound
    let d = DenseMatrix::from_fn(2 * k + 1, p + 1, |r, q| {
        if r == 2 * k {
            return if q == p { -1.0 } else { 0.0 };
        }
        if q == p {
            return -1.0;
        }
        let i = outside.as_slice()[r % k];
        let v = ctx.inst.a.get(i, cols[q]);
        if r < k {
            -v
        } else {
            v
        }
    });
    let mut e = Vec::with_capacity(2 * k + 1);
    for i in outside.iter() {
        e.push(-ctx.delta_k - ctx.inst.b[i]);
    }
    for i in outside.iter() {
        e.push(-ctx.delta_k + ctx.inst.b[i]);
    }
    e.push(-(ctx.delta_k - ctx.delta_target));
    let gy = ctx.inst.a.tr_mul_vec(&ctx.y_next);
    let mut sigma: Vec<f64> = cols.iter().map(|&j| if gy[j] > 0.0 { -1.0 } else { 1.0 }).collect();
    sigma.push(1.0);
    let mut c = vec![0.0; p + 1];
    c[p] = -1.0;
    let lp = StandardLp::new(c, a_eq, b_eq, d, e, sigma)?;
    let mut x0: Vec<f64> = cols.iter().map(|&j| ctx.x_start[j]).collect();
    x0.push(0.0);
    debug_assert_eq!(m, i_d.len() + k);
    Ok((lp, x0))
}
