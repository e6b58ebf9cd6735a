//! Primal active-set method for linear programs of the form
//!
//! ```text
//!     minimize    cᵀx
//!     subject to  A x = b
//!                 D x ≥ e
//!                 diag(σ) x ≥ 0,      σ ∈ {±1}ⁿ
//! ```
//!
//! Iterates stay feasible. Each iteration either moves along a direction
//! that keeps the active inequalities and the support fixed, or (when no such
//! direction exists) computes Lagrange multipliers and relaxes exactly one
//! index: an active inequality with negative `μ` leaves the active set, or a
//! zero variable with negative `ν` joins the support. Indices relaxed since
//! the last positive step are tracked so that zero steps can be undone.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm_inf, DenseMatrix, IndexSet, SolveReport};

/// An inequality `dᵢᵀx ≥ eᵢ` is active iff `|dᵢᵀx − eᵢ| ≤ ACTIVE_TOL (1 + |eᵢ|)`.
pub const ACTIVE_TOL: f64 = 1e-9;
/// A variable is in the support iff `|xⱼ| > SUPPORT_TOL`.
pub const SUPPORT_TOL: f64 = 1e-9;
/// Relative window for ties in the step-size minimum.
pub const TIE_TOL: f64 = 1e-9;

const DIRECTION_TOL: f64 = 1e-9;
const MULTIPLIER_SOLVE_TOL: f64 = 1e-6;
const ZERO_STEP: f64 = 1e-14;

/// Linear program in the structured form handled by [`asm_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct StandardLp {
    pub c: Vec<f64>,
    pub a_eq: DenseMatrix,
    pub b_eq: Vec<f64>,
    pub d: DenseMatrix,
    pub e: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl StandardLp {
    pub fn new(
        c: Vec<f64>,
        a_eq: DenseMatrix,
        b_eq: Vec<f64>,
        d: DenseMatrix,
        e: Vec<f64>,
        sigma: Vec<f64>,
    ) -> Result<Self> {
        let n = c.len();
        let ok = a_eq.cols() == n
            && a_eq.rows() == b_eq.len()
            && d.cols() == n
            && d.rows() == e.len()
            && sigma.len() == n;
        if !ok {
            return Err(Error::Dimension(format!(
                "c:{} A:{}x{} b:{} D:{}x{} e:{} sigma:{}",
                n,
                a_eq.rows(),
                a_eq.cols(),
                b_eq.len(),
                d.rows(),
                d.cols(),
                e.len(),
                sigma.len()
            )));
        }
        if sigma.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidArgument("sigma entries must be ±1".into()));
        }
        if c.iter().chain(&b_eq).chain(&e).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear program data"));
        }
        Ok(Self {
            c,
            a_eq,
            b_eq,
            d,
            e,
            sigma,
        })
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    #[inline]
    pub fn num_eq(&self) -> usize {
        self.b_eq.len()
    }

    #[inline]
    pub fn num_ineq(&self) -> usize {
        self.e.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    fn active_tol(&self, i: usize) -> f64 {
        ACTIVE_TOL * (1.0 + self.e[i].abs())
    }

    /// Checks `A x = b`, `D x ≥ e` and the sign bounds within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        let eq_ok = (0..self.num_eq())
            .all(|i| (dot(self.a_eq.row(i), x) - self.b_eq[i]).abs() <= tol * (1.0 + self.b_eq[i].abs()));
        let ineq_ok = (0..self.num_ineq())
            .all(|i| dot(self.d.row(i), x) - self.e[i] >= -tol * (1.0 + self.e[i].abs()));
        let sign_ok = x.iter().zip(&self.sigma).all(|(xj, s)| s * xj >= -tol);
        eq_ok && ineq_ok && sign_ok
    }
}

/// Iterate of the active-set method together with its index bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct AsmState {
    pub x: Vec<f64>,
    /// Inequalities held at equality.
    pub active: IndexSet,
    /// Variables allowed to be nonzero.
    pub support: IndexSet,
    /// Inequalities dropped from `active` since the last positive step.
    pub recently_removed: IndexSet,
    /// Variables added to `support` since the last positive step.
    pub recently_added: IndexSet,
    pub iteration: usize,
    /// Variable added by the immediately preceding multiplier round; the next
    /// direction is computed with this variable fixed to `σⱼ`.
    pub(crate) fixed_candidate: Option<usize>,
}

impl AsmState {
    /// Classifies a feasible point into active set and support.
    pub fn classify(lp: &StandardLp, x: Vec<f64>) -> Result<Self> {
        if x.len() != lp.num_vars() {
            return Err(Error::Dimension(format!(
                "start point of length {} for {} variables",
                x.len(),
                lp.num_vars()
            )));
        }
        if !lp.is_feasible(&x, 1e-8) {
            return Err(Error::InfeasibleStart(
                "start point violates the constraints".into(),
            ));
        }
        let active = IndexSet::from_predicate(lp.num_ineq(), |i| {
            (dot(lp.d.row(i), &x) - lp.e[i]).abs() <= lp.active_tol(i)
        });
        let support = IndexSet::from_predicate(lp.num_vars(), |j| x[j].abs() > SUPPORT_TOL);
        let mut x = x;
        for j in support.complement().iter() {
            x[j] = 0.0;
        }
        Ok(Self {
            x,
            active,
            support,
            recently_removed: IndexSet::empty(lp.num_ineq()),
            recently_added: IndexSet::empty(lp.num_vars()),
            iteration: 0,
            fixed_candidate: None,
        })
    }

    /// Verifies feasibility and the index-set invariants within `tol`.
    pub fn check_invariants(&self, lp: &StandardLp, tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(msg));
        if !lp.is_feasible(&self.x, tol) {
            return fail("iterate infeasible".into());
        }
        for i in 0..lp.num_ineq() {
            let slack = dot(lp.d.row(i), &self.x) - lp.e[i];
            let scale = 1.0 + lp.e[i].abs();
            if self.active.contains(i) && slack.abs() > tol * scale {
                return fail(format!("active row {i} has slack {slack:e}"));
            }
        }
        for j in 0..lp.num_vars() {
            if !self.support.contains(j) && self.x[j] != 0.0 {
                return fail(format!("variable {j} outside support is {}", self.x[j]));
            }
        }
        if !self.recently_removed.intersection(&self.active).is_empty() {
            return fail("removed ledger intersects active set".into());
        }
        if !self.recently_added.is_subset(&self.support) {
            return fail("added ledger not contained in support".into());
        }
        Ok(())
    }
}

/// Lagrange multipliers of the reduced optimality system.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    /// One per equality row.
    pub lambda: Vec<f64>,
    /// One per active inequality, in the order of `AsmState::active`.
    pub mu_active: Vec<f64>,
    /// One per variable outside the support, in complement order.
    pub nu_inactive: Vec<f64>,
}

impl Multipliers {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.mu_active.iter().chain(&self.nu_inactive).all(|&v| v >= -tol)
    }

    /// Expands `μ` to all inequality rows (zero off the active set).
    pub fn full_mu(&self, state: &AsmState, k: usize) -> Vec<f64> {
        let mut mu = vec![0.0; k];
        for (p, i) in state.active.iter().enumerate() {
            mu[i] = self.mu_active[p];
        }
        mu
    }

    /// Expands `ν` to all variables (zero on the support).
    pub fn full_nu(&self, state: &AsmState, n: usize) -> Vec<f64> {
        let mut nu = vec![0.0; n];
        for (p, j) in state.support.complement().iter().enumerate() {
            nu[j] = self.nu_inactive[p];
        }
        nu
    }
}

/// Step along a direction together with the blocking index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub alpha: f64,
    pub new_active: IndexSet,
    pub leaving_support: IndexSet,
}

/// Per-iteration record passed to the trace hook.
#[derive(Clone, Debug, PartialEq)]
pub struct AsmTrace {
    pub iteration: usize,
    /// `None` for a multiplier round.
    pub alpha: Option<f64>,
    pub active_len: usize,
    pub support_len: usize,
    pub objective: f64,
}

/// Result of [`asm_solve`].
#[derive(Clone, Debug)]
pub struct AsmSolution {
    pub x: Vec<f64>,
    pub state: AsmState,
    pub multipliers: Multipliers,
}

#[derive(Default)]
pub struct AsmOptions<'a> {
    /// Defaults to `50 (n + k + m)`.
    pub max_iters: Option<usize>,
    /// Invoked after every iteration with the updated state.
    pub observer: Option<&'a mut dyn FnMut(&AsmTrace, &AsmState)>,
}

/// Checks the KKT conditions of the LP for full-length multipliers.
pub fn kkt_check(
    lp: &StandardLp,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    nu: &[f64],
    tol: f64,
) -> Result<bool> {
    let (n, m, k) = (lp.num_vars(), lp.num_eq(), lp.num_ineq());
    if x.len() != n || lambda.len() != m || mu.len() != k || nu.len() != n {
        return Err(Error::Dimension(format!(
            "x:{} lambda:{} mu:{} nu:{} for n={n} m={m} k={k}",
            x.len(),
            lambda.len(),
            mu.len(),
            nu.len()
        )));
    }
    if !lp.is_feasible(x, tol) {
        return Ok(false);
    }
    let mut grad = lp.a_eq.tr_mul_vec(lambda);
    linalg::axpy(1.0, &lp.d.tr_mul_vec(mu), &mut grad);
    let cscale = 1.0 + norm_inf(&lp.c);
    for j in 0..n {
        if (grad[j] + lp.sigma[j] * nu[j] - lp.c[j]).abs() > tol * cscale {
            return Ok(false);
        }
    }
    for i in 0..k {
        let slack = dot(lp.d.row(i), x) - lp.e[i];
        if mu[i] < -tol || (mu[i] * slack).abs() > tol * (1.0 + mu[i].abs()) * (1.0 + lp.e[i].abs()) {
            return Ok(false);
        }
    }
    for j in 0..n {
        if nu[j] < -tol || (nu[j] * x[j]).abs() > tol * (1.0 + nu[j].abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves `[A_S; D^A_S; c_Sᵀ] ξ_S = (0, 0, −1)` with `ξ` zero off the support.
///
/// When the preceding multiplier round added variable `j`, the equivalent
/// smaller system with `ξⱼ = σⱼ` fixed and the objective row dropped is tried
/// first; its solution is rescaled so that `cᵀξ = −1`.
pub fn find_direction(lp: &StandardLp, state: &AsmState) -> Result<SolveReport> {
    if let Some(j) = state.fixed_candidate {
        if let Some(report) = fixed_direction(lp, state, j)? {
            return Ok(report);
        }
    }
    full_direction(lp, state)
}

fn direction_rows(lp: &StandardLp, state: &AsmState, cols: &[usize]) -> DenseMatrix {
    let eq = lp.a_eq.select(&(0..lp.num_eq()).collect::<Vec<_>>(), cols);
    let act = lp.d.select(state.active.as_slice(), cols);
    eq.vstack(&act).expect("column counts agree")
}

fn full_direction(lp: &StandardLp, state: &AsmState) -> Result<SolveReport> {
    let cols = state.support.as_slice();
    let cost = DenseMatrix::from_fn(1, cols.len(), |_, p| lp.c[cols[p]]);
    let m = direction_rows(lp, state, cols).vstack(&cost)?;
    let mut rhs = vec![0.0; m.rows()];
    *rhs.last_mut().expect("objective row") = -1.0;
    let report = linalg::solve_consistent(&m, &rhs, DIRECTION_TOL)?;
    Ok(embed(report, cols, lp.num_vars()))
}

fn fixed_direction(lp: &StandardLp, state: &AsmState, j: usize) -> Result<Option<SolveReport>> {
    let cols: Vec<usize> = state.support.iter().filter(|&p| p != j).collect();
    let m = direction_rows(lp, state, &cols);
    let col_j = direction_rows(lp, state, &[j]);
    let rhs: Vec<f64> = (0..col_j.rows()).map(|r| -lp.sigma[j] * col_j.get(r, 0)).collect();
    let report = linalg::solve_consistent(&m, &rhs, DIRECTION_TOL)?;
    let Some(sol) = report.solution else {
        return Ok(None);
    };
    let mut xi = vec![0.0; lp.num_vars()];
    for (p, &col) in cols.iter().enumerate() {
        xi[col] = sol[p];
    }
    xi[j] = lp.sigma[j];
    let cval = dot(&lp.c, &xi);
    if cval >= -1e-12 {
        return Ok(None);
    }
    xi.iter_mut().for_each(|v| *v /= -cval);
    // residual of the full system at the rescaled direction
    let full = direction_rows(lp, state, state.support.as_slice());
    let xs: Vec<f64> = state.support.iter().map(|c| xi[c]).collect();
    let mut residual = norm_inf(&full.mul_vec(&xs));
    residual = residual.max((dot(&lp.c, &xi) + 1.0).abs());
    Ok(Some(SolveReport {
        solution: Some(xi),
        residual_norm: residual,
        consistent: true,
    }))
}

fn embed(report: SolveReport, cols: &[usize], n: usize) -> SolveReport {
    SolveReport {
        solution: report.solution.map(|s| {
            let mut xi = vec![0.0; n];
            for (p, &c) in cols.iter().enumerate() {
                xi[c] = s[p];
            }
            xi
        }),
        ..report
    }
}

fn direction_tol(xi: &[f64]) -> f64 {
    DIRECTION_TOL * (1.0 + norm_inf(xi))
}

/// Largest feasible step along `xi` and the blocking index sets.
pub fn step_size(lp: &StandardLp, state: &AsmState, xi: &[f64]) -> Result<Step> {
    if xi.len() != lp.num_vars() {
        return Err(Error::Dimension("direction length".into()));
    }
    let dtol = direction_tol(xi);
    let mut ratios: Vec<(f64, Blocker)> = Vec::new();
    for i in 0..lp.num_ineq() {
        if state.active.contains(i) {
            continue;
        }
        let row = lp.d.row(i);
        let g = dot(row, xi);
        if g < -dtol * (1.0 + norm_inf(row)) {
            let slack = if state.recently_removed.contains(i) {
                0.0
            } else {
                (dot(row, &state.x) - lp.e[i]).max(0.0)
            };
            ratios.push((slack / -g, Blocker::Row(i)));
        }
    }
    for j in state.support.iter() {
        let sx = lp.sigma[j] * xi[j];
        if sx < -dtol {
            let val = if state.recently_added.contains(j) {
                0.0
            } else {
                (lp.sigma[j] * state.x[j]).max(0.0)
            };
            ratios.push((val / -sx, Blocker::Var(j)));
        }
    }
    let alpha = ratios
        .iter()
        .map(|r| r.0)
        .fold(f64::INFINITY, f64::min);
    if !alpha.is_finite() {
        return Err(Error::Unbounded(
            "no blocking constraint along the descent direction".into(),
        ));
    }
    let window = alpha + TIE_TOL * (1.0 + alpha);
    let mut new_active = IndexSet::empty(lp.num_ineq());
    let mut leaving = IndexSet::empty(lp.num_vars());
    for (r, b) in ratios {
        if r <= window {
            match b {
                Blocker::Row(i) => new_active.insert(i),
                Blocker::Var(j) => leaving.insert(j),
            };
        }
    }
    Ok(Step {
        alpha,
        new_active,
        leaving_support: leaving,
    })
}

#[derive(Clone, Copy, Debug)]
enum Blocker {
    Row(usize),
    Var(usize),
}

/// Multipliers `(λ, μ_A)` from `A_Sᵀλ + (D^A_S)ᵀμ_A = c_S` and `ν` off the support.
pub fn multipliers(lp: &StandardLp, state: &AsmState) -> Result<Multipliers> {
    let m = lp.num_eq();
    let support = state.support.as_slice();
    let active = state.active.as_slice();
    let sys = DenseMatrix::from_fn(support.len(), m + active.len(), |p, q| {
        if q < m {
            lp.a_eq.get(q, support[p])
        } else {
            lp.d.get(active[q - m], support[p])
        }
    });
    let rhs: Vec<f64> = support.iter().map(|&j| lp.c[j]).collect();
    let report = linalg::solve_consistent(&sys, &rhs, MULTIPLIER_SOLVE_TOL)?;
    let sol = report.solution.ok_or_else(|| {
        Error::InconsistentMultipliers(format!(
            "stationarity residual {:e} on support of size {}",
            report.residual_norm,
            support.len()
        ))
    })?;
    let lambda = sol[..m].to_vec();
    let mu_active = sol[m..].to_vec();
    let nu_inactive = state
        .support
        .complement()
        .iter()
        .map(|j| {
            let mut r = lp.c[j] - lp.a_eq.col_dot(j, &lambda);
            for (p, &i) in active.iter().enumerate() {
                r -= lp.d.get(i, j) * mu_active[p];
            }
            lp.sigma[j] * r
        })
        .collect();
    Ok(Multipliers {
        lambda,
        mu_active,
        nu_inactive,
    })
}

/// Smallest value and its index; ties go to the earliest position.
pub(crate) fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (p, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((p, v));
        }
    }
    best
}

/// Runs the active-set method from a feasible `x0`.
pub fn asm_solve(lp: &StandardLp, x0: Vec<f64>, xi0: Option<Vec<f64>>) -> Result<AsmSolution> {
    asm_solve_with(lp, x0, xi0, AsmOptions::default())
}

pub fn asm_solve_with(
    lp: &StandardLp,
    x0: Vec<f64>,
    xi0: Option<Vec<f64>>,
    mut opts: AsmOptions<'_>,
) -> Result<AsmSolution> {
    let (n, m, k) = (lp.num_vars(), lp.num_eq(), lp.num_ineq());
    let cap = opts.max_iters.unwrap_or(50 * (n + k + m).max(1));
    let opt_tol = 1e-9 * (1.0 + norm_inf(&lp.c));
    let mut state = AsmState::classify(lp, x0)?;

    let mut pending = match xi0 {
        Some(xi) => {
            validate_direction(lp, &state, &xi)?;
            Some(xi)
        }
        None => None,
    };

    while state.iteration < cap {
        state.iteration += 1;
        let direction = match pending.take() {
            Some(xi) => Some(xi),
            None => find_direction(lp, &state)?.solution,
        };

        let alpha = match direction {
            Some(xi) => {
                let step = step_size(lp, &state, &xi)?;
                apply_step(lp, &mut state, &xi, &step);
                Some(step.alpha)
            }
            None => {
                let mult = multipliers(lp, &state)?;
                let worst_mu = argmin(&mult.mu_active);
                let worst_nu = argmin(&mult.nu_inactive);
                let mu_val = worst_mu.map_or(f64::INFINITY, |w| w.1);
                let nu_val = worst_nu.map_or(f64::INFINITY, |w| w.1);
                if mu_val >= -opt_tol && nu_val >= -opt_tol {
                    let x = state.x.clone();
                    return Ok(AsmSolution {
                        x,
                        state,
                        multipliers: mult,
                    });
                }
                if mu_val < nu_val {
                    let i = state.active.as_slice()[worst_mu.expect("finite").0];
                    state.active.remove(i);
                    state.recently_removed.insert(i);
                    state.fixed_candidate = None;
                } else {
                    let j = state.support.complement().as_slice()[worst_nu.expect("finite").0];
                    state.support.insert(j);
                    state.recently_added.insert(j);
                    state.fixed_candidate = Some(j);
                }
                None
            }
        };

        if let Some(obs) = opts.observer.as_mut() {
            let trace = AsmTrace {
                iteration: state.iteration,
                alpha,
                active_len: state.active.len(),
                support_len: state.support.len(),
                objective: lp.objective(&state.x),
            };
            obs(&trace, &state);
        }
    }
    Err(Error::IterationLimit {
        limit: cap,
        context: "active-set LP solve",
    })
}

fn validate_direction(lp: &StandardLp, state: &AsmState, xi: &[f64]) -> Result<()> {
    if xi.len() != lp.num_vars() {
        return Err(Error::Dimension("initial direction length".into()));
    }
    let tol = 1e-8 * (1.0 + norm_inf(xi));
    let off_support = state
        .support
        .complement()
        .iter()
        .any(|j| xi[j].abs() > tol);
    let rows = direction_rows(lp, state, &(0..lp.num_vars()).collect::<Vec<_>>());
    let resid = norm_inf(&rows.mul_vec(xi));
    if off_support || resid > tol || (dot(&lp.c, xi) + 1.0).abs() > tol {
        return Err(Error::Precondition(
            "initial direction does not solve the direction system".into(),
        ));
    }
    Ok(())
}

fn apply_step(lp: &StandardLp, state: &mut AsmState, xi: &[f64], step: &Step) {
    let zero_step = step.alpha <= ZERO_STEP;
    if !zero_step {
        linalg::axpy(step.alpha, xi, &mut state.x);
    }
    for i in step.new_active.iter() {
        state.active.insert(i);
    }
    for j in step.leaving_support.iter() {
        state.support.remove(j);
        state.x[j] = 0.0;
    }
    if zero_step {
        state.recently_removed = state.recently_removed.difference(&step.new_active);
        state.recently_added = state.recently_added.difference(&step.leaving_support);
    } else {
        if state.recently_removed.len() + state.recently_added.len() > 1 {
            let dtol = direction_tol(xi);
            for i in state.recently_removed.iter() {
                if dot(lp.d.row(i), xi).abs() <= dtol * (1.0 + norm_inf(lp.d.row(i))) {
                    state.active.insert(i);
                }
            }
            for j in state.recently_added.iter() {
                if xi[j].abs() <= dtol {
                    state.support.remove(j);
                    state.x[j] = 0.0;
                }
            }
        }
        // after a positive step the relaxed indices are strictly inactive
        state.recently_removed.clear();
        state.recently_added.clear();
    }
    state.fixed_candidate = None;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[Vec<f64>], cols: usize) -> DenseMatrix {
        if rows.is_empty() {
            DenseMatrix::zeros(0, cols)
        } else {
            DenseMatrix::from_rows(rows).unwrap()
        }
    }

    /// min x s.t. x = 1
    fn pinned() -> StandardLp {
        StandardLp::new(
            vec![1.0],
            m(&[vec![1.0]], 1),
            vec![1.0],
            m(&[], 1),
            vec![],
            vec![1.0],
        )
        .unwrap()
    }

    /// min −t s.t. −t ≥ −1, t ≥ 0
    fn capped() -> StandardLp {
        StandardLp::new(
            vec![-1.0],
            m(&[], 1),
            vec![],
            m(&[vec![-1.0]], 1),
            vec![-1.0],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn kkt_scalar_equality() {
        let lp = pinned();
        assert!(kkt_check(&lp, &[1.0], &[1.0], &[], &[0.0], 1e-9).unwrap());
        assert!(!kkt_check(&lp, &[1.0], &[0.0], &[], &[0.0], 1e-9).unwrap());
        assert!(kkt_check(&lp, &[1.0], &[1.0, 2.0], &[], &[0.0], 1e-9).is_err());
    }

    #[test]
    fn direction_scalar_cases() {
        let lp = capped();
        let mut state = AsmState::classify(&lp, vec![0.5]).unwrap();
        assert!(state.active.is_empty());
        let r = find_direction(&lp, &state).unwrap();
        assert!(r.consistent);
        assert_abs_diff_eq!(r.solution.unwrap()[0], 1.0, epsilon = 1e-14);

        state.active.insert(0);
        let r = find_direction(&lp, &state).unwrap();
        assert!(!r.consistent);
    }

    #[test]
    fn step_hits_zero_bound() {
        // x = 1 moving along −1 reaches its sign bound at α = 1
        let lp = StandardLp::new(
            vec![1.0],
            m(&[], 1),
            vec![],
            m(&[], 1),
            vec![],
            vec![1.0],
        )
        .unwrap();
        let state = AsmState::classify(&lp, vec![1.0]).unwrap();
        let step = step_size(&lp, &state, &[-1.0]).unwrap();
        assert_abs_diff_eq!(step.alpha, 1.0);
        assert_eq!(step.leaving_support.as_slice(), &[0]);
    }

    #[test]
    fn step_hits_upper_bound() {
        // x ≤ 2 written as −x ≥ −2, from x = 0.5 along +1: α = 1.5
        let lp = StandardLp::new(
            vec![-1.0],
            m(&[], 1),
            vec![],
            m(&[vec![-1.0]], 1),
            vec![-2.0],
            vec![1.0],
        )
        .unwrap();
        let state = AsmState::classify(&lp, vec![0.5]).unwrap();
        let step = step_size(&lp, &state, &[1.0]).unwrap();
        assert_abs_diff_eq!(step.alpha, 1.5, epsilon = 1e-14);
        assert_eq!(step.new_active.as_slice(), &[0]);
        // with D = [1], e = 2 the direction moves away and nothing blocks
        let lp = StandardLp::new(
            vec![-1.0],
            m(&[], 1),
            vec![],
            m(&[vec![1.0]], 1),
            vec![0.0],
            vec![1.0],
        )
        .unwrap();
        let state = AsmState::classify(&lp, vec![0.5]).unwrap();
        assert!(matches!(step_size(&lp, &state, &[1.0]), Err(Error::Unbounded(_))));
    }

    #[test]
    fn step_reports_ties() {
        // −x1 − x2 ≥ −2 and −x1 + x2 ≥ −2 from the origin along (1, 0): both hit at α = 2
        let lp = StandardLp::new(
            vec![-1.0, 0.0],
            m(&[], 2),
            vec![],
            m(&[vec![-1.0, -1.0], vec![-1.0, 1.0]], 2),
            vec![-2.0, -2.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let mut state = AsmState::classify(&lp, vec![0.0, 0.0]).unwrap();
        state.support.insert(0);
        let step = step_size(&lp, &state, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(step.alpha, 2.0);
        assert_eq!(step.new_active.as_slice(), &[0, 1]);
    }

    #[test]
    fn multipliers_scalar_cases() {
        // min x s.t. x ≥ 0 at x = 0: ν = σ c = 1
        let lp = StandardLp::new(vec![1.0], m(&[], 1), vec![], m(&[], 1), vec![], vec![1.0]).unwrap();
        let state = AsmState::classify(&lp, vec![0.0]).unwrap();
        assert!(!find_direction(&lp, &state).unwrap().consistent);
        let mult = multipliers(&lp, &state).unwrap();
        assert_eq!(mult.nu_inactive, vec![1.0]);
        assert!(mult.is_optimal(1e-12));

        // min −x s.t. x ≤ 1 at x = 1: μ = 1
        let lp = capped();
        let state = AsmState::classify(&lp, vec![1.0]).unwrap();
        assert_eq!(state.active.as_slice(), &[0]);
        let mult = multipliers(&lp, &state).unwrap();
        assert_abs_diff_eq!(mult.mu_active[0], 1.0, epsilon = 1e-14);
        assert!(mult.is_optimal(1e-12));
    }

    #[test]
    fn solve_objective_parallel_to_facet() {
        // min x1 + x2 s.t. x1 + x2 ≥ 1, x ≥ 0 from (1, 0)
        let lp = StandardLp::new(
            vec![1.0, 1.0],
            m(&[], 2),
            vec![],
            m(&[vec![1.0, 1.0]], 2),
            vec![1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = asm_solve(&lp, vec![1.0, 0.0], None).unwrap();
        assert_abs_diff_eq!(lp.objective(&sol.x), 1.0, epsilon = 1e-12);
        let mu = sol.multipliers.full_mu(&sol.state, 1);
        assert_abs_diff_eq!(mu[0], 1.0, epsilon = 1e-12);
        let nu = sol.multipliers.full_nu(&sol.state, 2);
        assert!(kkt_check(&lp, &sol.x, &sol.multipliers.lambda, &mu, &nu, 1e-9).unwrap());
    }

    #[test]
    fn solve_capped_from_interior_with_initial_direction() {
        let lp = capped();
        let sol = asm_solve(&lp, vec![0.25], Some(vec![1.0])).unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-14);
        assert!(matches!(
            asm_solve(&lp, vec![0.25], Some(vec![-1.0])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn infeasible_start_rejected() {
        let lp = capped();
        assert!(matches!(
            asm_solve(&lp, vec![2.0], None),
            Err(Error::InfeasibleStart(_))
        ));
    }

    #[test]
    fn iteration_cap_reported() {
        let lp = StandardLp::new(
            vec![1.0, 1.0],
            m(&[], 2),
            vec![],
            m(&[vec![1.0, 1.0]], 2),
            vec![1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let opts = AsmOptions {
            max_iters: Some(0),
            observer: None,
        };
        assert!(matches!(
            asm_solve_with(&lp, vec![3.0, 0.0], None, opts),
            Err(Error::IterationLimit { .. })
        ));
    }
}
