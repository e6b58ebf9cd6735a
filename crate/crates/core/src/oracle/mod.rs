//! Brute-force reference solver used for verification.
//!
//! Everything here goes through [`simplex_solve`] on an explicit LP encoding,
//! sharing no code with the homotopy or active-set solvers beyond dense
//! matrix storage.

mod simplex;

pub use simplex::{feasibility, simplex_solve, GeneralLp, LpSolution};

use crate::error::{Error, Result};
use crate::linalg::{norm1, sign, DenseMatrix};
use crate::problem::{IndexSets, ProblemInstance};

/// Threshold on the maximised slack of a strict inequality.
pub const STRICT_SLACK_TOL: f64 = 1e-9;

/// Split form with variables `(x⁺, x⁻, r, s) ≥ 0` and rows
/// `[A −A I 0; −A A 0 I] = (b + δ𝟙; −b + δ𝟙)`.
pub fn reformulate(inst: &ProblemInstance) -> GeneralLp {
    let (m, n) = (inst.rows(), inst.cols());
    let nv = 2 * n + 2 * m;
    let eq = DenseMatrix::from_fn(2 * m, nv, |r, c| {
        let (i, top) = if r < m { (r, 1.0) } else { (r - m, -1.0) };
        if c < n {
            top * inst.a.get(i, c)
        } else if c < 2 * n {
            -top * inst.a.get(i, c - n)
        } else if c - 2 * n == r {
            1.0
        } else {
            0.0
        }
    });
    let rhs = (0..2 * m)
        .map(|r| if r < m { inst.b[r] + inst.delta } else { -inst.b[r - m] + inst.delta })
        .collect();
    let cost = (0..nv).map(|c| if c < 2 * n { 1.0 } else { 0.0 }).collect();
    GeneralLp::new(
        cost,
        eq,
        rhs,
        DenseMatrix::zeros(0, nv),
        vec![],
        vec![0.0; nv],
    )
    .expect("consistent dimensions")
}

/// Reference solution of the ℓ1 problem: `x`, objective and a dual vector `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub y: Vec<f64>,
}

/// Solves the instance through [`reformulate`]; `y = w₂ − w₁` from the row duals.
pub fn solve_instance(inst: &ProblemInstance) -> Result<OracleSolution> {
    let (m, n) = (inst.rows(), inst.cols());
    let sol = simplex_solve(&reformulate(inst))?;
    let x = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
    let y = (0..m).map(|i| sol.dual[m + i] - sol.dual[i]).collect();
    Ok(OracleSolution {
        x,
        objective: sol.value,
        y,
    })
}

/// `min ‖y‖₁  s.t.  −Aᵀy ∈ Sign(x̄)`, solved with `y = p − q`.
pub fn certificate_l1(a: &DenseMatrix, x_bar: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if x_bar.len() != n {
        return Err(Error::Dimension(format!(
            "x_bar has length {} for {} columns",
            x_bar.len(),
            n
        )));
    }
    let mut lp = GeneralLp::free(vec![1.0; 2 * m]);
    lp.lower = vec![0.0; 2 * m];
    for j in 0..n {
        let col = a.col(j);
        let row: Vec<f64> = col.iter().map(|v| -v).chain(col.iter().copied()).collect();
        if x_bar[j] != 0.0 {
            lp.push_eq(&row, sign(x_bar[j]));
        } else {
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            lp.push_le(&row, 1.0);
            lp.push_le(&neg, 1.0);
        }
    }
    match simplex_solve(&lp) {
        Ok(sol) => Ok((0..m).map(|i| sol.x[i] - sol.x[m + i]).collect()),
        Err(Error::Infeasible) => Err(Error::Precondition(
            "no certificate exists: x_bar is not optimal for basis pursuit".into(),
        )),
        Err(e) => Err(e),
    }
}

/// Whether `x̄` attains the basis-pursuit optimum for `(A, Ax̄)` within `rel_tol`.
pub fn is_bp_optimal(a: &DenseMatrix, x_bar: &[f64], rel_tol: f64) -> Result<bool> {
    let b = a.mul_vec(x_bar);
    let inst = ProblemInstance::new(a.clone(), b, 0.0)?;
    let sol = solve_instance(&inst)?;
    let target = norm1(x_bar);
    Ok(target - sol.objective <= rel_tol * (1.0 + target))
}

/// Maximises the slack `ρ ∈ [0, 1]` of the strict row `rowᵀz < rhs` subject to
/// the constraints of `lp`; returns `None` when `lp` itself is infeasible.
pub fn max_strict_slack(lp: &GeneralLp, row: &[f64], rhs: f64) -> Result<Option<f64>> {
    let n = lp.num_vars();
    if row.len() != n {
        return Err(Error::Dimension("strict row length".into()));
    }
    let widen = |m: &DenseMatrix| {
        DenseMatrix::from_fn(m.rows(), n + 1, |i, j| if j < n { m.get(i, j) } else { 0.0 })
    };
    let mut cost = vec![0.0; n + 1];
    cost[n] = -1.0;
    let mut lower = lp.lower.clone();
    lower.push(0.0);
    let mut ext = GeneralLp::new(
        cost,
        widen(&lp.eq_matrix),
        lp.eq_rhs.clone(),
        widen(&lp.ineq_matrix),
        lp.ineq_rhs.clone(),
        lower,
    )?;
    let mut strict: Vec<f64> = row.to_vec();
    strict.push(1.0);
    ext.push_le(&strict, rhs);
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    ext.push_le(&cap, 1.0);
    match simplex_solve(&ext) {
        Ok(sol) => Ok(Some(sol.x[n])),
        Err(Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Feasibility of `lp` together with the strict row `rowᵀz < rhs`.
pub fn feasibility_strict(lp: &GeneralLp, row: &[f64], rhs: f64) -> Result<bool> {
    Ok(max_strict_slack(lp, row, rhs)?.is_some_and(|rho| rho > STRICT_SLACK_TOL))
}

/// Dual-direction system in `e` on the rows `I_P`, with `|e| ≤ 1`.
///
/// Returns the constraint LP and the strict row `−sᵀe < 0`.
pub fn dual_direction_system(
    inst: &ProblemInstance,
    y_hat: &[f64],
    sets: &IndexSets,
) -> (GeneralLp, Vec<f64>) {
    let rows = sets.i_p.as_slice();
    let s = &sets.residual_signs;
    let p = rows.len();
    let mut lp = GeneralLp::free(vec![0.0; p]);
    lp.lower = vec![-1.0; p];
    for q in 0..p {
        let mut r = vec![0.0; p];
        r[q] = 1.0;
        lp.push_le(&r, 1.0);
    }
    let col_on_rows = |j: usize| -> Vec<f64> { rows.iter().map(|&i| inst.a.get(i, j)).collect() };
    for j in sets.j_p.iter() {
        lp.push_eq(&col_on_rows(j), 0.0);
    }
    let g = inst.a.tr_mul_vec(y_hat);
    for j in sets.j_d.difference(&sets.j_p).iter() {
        let row: Vec<f64> = col_on_rows(j).iter().map(|v| g[j] * v).collect();
        lp.push_le(&row, 0.0);
    }
    for i in sets.i_p.difference(&sets.i_d).iter() {
        let q = sets.i_p.position(i).expect("subset");
        let mut r = vec![0.0; p];
        r[q] = -s[q];
        lp.push_le(&r, 0.0);
    }
    let strict = s.iter().map(|v| -v).collect();
    (lp, strict)
}

/// Primal-direction system in `d` on the columns `J_D`.
pub fn primal_direction_system(inst: &ProblemInstance, y_hat: &[f64], sets: &IndexSets) -> GeneralLp {
    let cols = sets.j_d.as_slice();
    let p = cols.len();
    let mut lp = GeneralLp::free(vec![0.0; p]);
    let row_on_cols = |i: usize| -> Vec<f64> { cols.iter().map(|&j| inst.a.get(i, j)).collect() };
    for (q, i) in sets.i_d.iter().enumerate() {
        lp.push_eq(&row_on_cols(i), -sets.dual_signs[q]);
    }
    for i in sets.i_p.difference(&sets.i_d).iter() {
        let si = sets.residual_signs[sets.i_p.position(i).expect("subset")];
        let row: Vec<f64> = row_on_cols(i).iter().map(|v| si * v).collect();
        lp.push_le(&row, -1.0);
    }
    let g = inst.a.tr_mul_vec(y_hat);
    for j in sets.j_d.difference(&sets.j_p).iter() {
        let q = sets.j_d.position(j).expect("subset");
        let mut r = vec![0.0; p];
        r[q] = g[j];
        lp.push_le(&r, 0.0);
    }
    lp
}

/// Feasibility of the two alternative direction systems at a pair.
pub fn alternative_systems(
    inst: &ProblemInstance,
    x_hat: &[f64],
    y_hat: &[f64],
    delta_hat: f64,
) -> Result<(bool, bool)> {
    let sets = IndexSets::from_pair(inst, x_hat, y_hat, delta_hat)?;
    let (lp1, strict) = dual_direction_system(inst, y_hat, &sets);
    let first = feasibility_strict(&lp1, &strict, 0.0)?;
    let second = feasibility(&primal_direction_system(inst, y_hat, &sets))?;
    Ok((first, second))
}

/// Dual update LP in `y` on the rows `I_P`:
/// `min −sᵀy  s.t.  −A_{J_P}ᵀy = sign x_{J_P}, |A_jᵀy| ≤ 1, s ⊙ y ≥ 0`.
pub fn dual_update_lp(inst: &ProblemInstance, sets: &IndexSets) -> GeneralLp {
    let rows = sets.i_p.as_slice();
    let s = &sets.residual_signs;
    let p = rows.len();
    let mut lp = GeneralLp::free(s.iter().map(|v| -v).collect());
    let col_on_rows = |j: usize| -> Vec<f64> { rows.iter().map(|&i| inst.a.get(i, j)).collect() };
    for (q, j) in sets.j_p.iter().enumerate() {
        let row: Vec<f64> = col_on_rows(j).iter().map(|v| -v).collect();
        lp.push_eq(&row, sets.primal_signs[q]);
    }
    for j in sets.j_p.complement().iter() {
        let col = col_on_rows(j);
        let neg: Vec<f64> = col.iter().map(|v| -v).collect();
        lp.push_le(&col, 1.0);
        lp.push_le(&neg, 1.0);
    }
    for q in 0..p {
        let mut r = vec![0.0; p];
        r[q] = -s[q];
        lp.push_le(&r, 0.0);
    }
    lp
}

/// Primal update LP in `(x_{J_D}, t)`: maximise `t` (encoded as `min −t`).
pub fn primal_update_lp(
    inst: &ProblemInstance,
    y_hat: &[f64],
    sets: &IndexSets,
    delta_hat: f64,
    delta_target: f64,
) -> GeneralLp {
    let cols = sets.j_d.as_slice();
    let p = cols.len();
    let mut cost = vec![0.0; p + 1];
    cost[p] = -1.0;
    let mut lp = GeneralLp::free(cost);
    let row_on_cols = |i: usize| -> Vec<f64> { cols.iter().map(|&j| inst.a.get(i, j)).collect() };
    for (q, i) in sets.i_d.iter().enumerate() {
        let sg = sets.dual_signs[q];
        let mut row = row_on_cols(i);
        row.push(sg);
        lp.push_eq(&row, delta_hat * sg + inst.b[i]);
    }
    for i in sets.i_d.complement().iter() {
        let mut up = row_on_cols(i);
        up.push(1.0);
        lp.push_le(&up, delta_hat + inst.b[i]);
        let mut down: Vec<f64> = row_on_cols(i).iter().map(|v| -v).collect();
        down.push(1.0);
        lp.push_le(&down, delta_hat - inst.b[i]);
    }
    let g = inst.a.tr_mul_vec(y_hat);
    for (q, &j) in cols.iter().enumerate() {
        let mut r = vec![0.0; p + 1];
        r[q] = g[j];
        lp.push_le(&r, 0.0);
    }
    let mut r = vec![0.0; p + 1];
    r[p] = 1.0;
    lp.push_le(&r, delta_hat - delta_target);
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn inst(rows: &[Vec<f64>], b: Vec<f64>, delta: f64) -> ProblemInstance {
        ProblemInstance::new(DenseMatrix::from_rows(rows).unwrap(), b, delta).unwrap()
    }

    #[test]
    fn reformulate_scalar() {
        let p = inst(&[vec![1.0]], vec![2.0], 1.0);
        let lp = reformulate(&p);
        assert_eq!(lp.eq_rhs.len(), 2);
        assert_eq!(lp.num_vars(), 4);
        let sol = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-12);
        let o = solve_instance(&p).unwrap();
        assert_abs_diff_eq!(o.y[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn reformulate_zero_solution_at_start() {
        let p = inst(&[vec![1.0, 2.0], vec![0.5, -1.0]], vec![1.0, -3.0], 3.0);
        let o = solve_instance(&p).unwrap();
        assert_abs_diff_eq!(o.objective, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_soft_threshold_value() {
        let p = inst(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![3.0, -0.5], 0.5);
        let o = solve_instance(&p).unwrap();
        // Σ max(|b_j| − δ, 0)
        assert_abs_diff_eq!(o.objective, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn certificates() {
        let a = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let y = certificate_l1(&a, &[1.0]).unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-12);

        let a = DenseMatrix::identity(2);
        let y = certificate_l1(&a, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-12);

        // x̄ = (1, 1) with a repeated column is not optimal: (2, 0) has the same image
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert!(certificate_l1(&a, &[1.0, -1.0]).is_err());
        assert!(!is_bp_optimal(&a, &[1.0, -1.0], 1e-9).unwrap());
        assert!(is_bp_optimal(&a, &[1.0, 1.0], 1e-9).unwrap());
    }

    #[test]
    fn strict_slack() {
        // z ∈ [0, 1] and z < 0.5
        let mut lp = GeneralLp::free(vec![0.0]);
        lp.lower = vec![0.0];
        lp.push_le(&[1.0], 1.0);
        assert!(feasibility_strict(&lp, &[1.0], 0.5).unwrap());
        // z < 0 is impossible
        assert!(!feasibility_strict(&lp, &[1.0], 0.0).unwrap());
    }

    #[test]
    fn alternatives_scalar() {
        // (0, −1) at δ̂ = 2 is optimal for A = [1], b = 2 and the dual LP optimum;
        // progress is possible, so only the second system holds.
        let p = inst(&[vec![1.0]], vec![2.0], 0.0);
        assert_eq!(alternative_systems(&p, &[0.0], &[-1.0], 2.0).unwrap(), (false, true));
        // with y = 0 the dual can still improve
        assert_eq!(alternative_systems(&p, &[0.0], &[0.0], 2.0).unwrap(), (true, false));
    }

    #[test]
    fn update_lps_scalar() {
        let p = inst(&[vec![1.0]], vec![2.0], 0.0);
        let sets = IndexSets::from_pair(&p, &[0.0], &[0.0], 2.0).unwrap();
        let dual = simplex_solve(&dual_update_lp(&p, &sets)).unwrap();
        assert_abs_diff_eq!(dual.x[0], -1.0, epsilon = 1e-12);

        let y = [-1.0];
        let sets = IndexSets::from_pair(&p, &[0.0], &y, 2.0).unwrap();
        let primal = simplex_solve(&primal_update_lp(&p, &y, &sets, 2.0, 0.5)).unwrap();
        assert_abs_diff_eq!(primal.x[1], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(primal.x[0], 1.5, epsilon = 1e-12);
    }
}
