//! The homotopy driver: alternate dual and primal updates from `δ⁰ = ‖b‖∞`
//! down to the target, recording every breakpoint of the solution path.

use std::time::{Duration, Instant};

use crate::dual::{dual_update, DualContext};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, IndexSet};
use crate::oracle;
use crate::primal::{primal_update, PrimalContext};
use crate::problem::{check_optimal_pair, initial_delta, IndexSets, ProblemInstance};

/// Steps at or below this size count as degenerate.
pub const MIN_STEP: f64 = 1e-12;
/// Relative tolerance for ties in `|bᵢ| = ‖b‖∞` at the start.
pub const START_TIE_TOL: f64 = 1e-12;

/// One knot of the path: `(xᵏ, yᵏ)` is an optimal pair at `δᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBreakpoint {
    pub k: usize,
    pub delta_k: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sets: IndexSets,
    /// `δᵏ⁻¹ − δᵏ`, zero for the first breakpoint.
    pub t_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    TargetReached,
    Failure(String),
}

/// Counters and wall-clock time per phase.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathStats {
    pub dual_iterations: usize,
    pub primal_iterations: usize,
    pub retries: usize,
    pub dual_time: Duration,
    pub primal_time: Duration,
    pub refresh_time: Duration,
}

impl PathStats {
    pub fn subsolver_iterations(&self) -> usize {
        self.dual_iterations + self.primal_iterations
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPath {
    pub breakpoints: Vec<PathBreakpoint>,
    pub terminated: Termination,
    pub target: f64,
    pub stats: PathStats,
}

impl SolutionPath {
    pub fn is_complete(&self) -> bool {
        self.terminated == Termination::TargetReached
    }

    pub fn last(&self) -> &PathBreakpoint {
        self.breakpoints.last().expect("paths have a first breakpoint")
    }

    /// `‖x‖₁` at the last breakpoint.
    pub fn final_objective(&self) -> f64 {
        crate::linalg::norm1(&self.last().x)
    }

    /// Number of homotopy iterations performed.
    pub fn iterations(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Subproblem handed to the snapshot hook just before it is solved.
pub enum Snapshot<'s, 'a> {
    Dual(&'s DualContext<'a>),
    Primal(&'s PrimalContext<'a>),
}

pub struct HomotopyOptions<'h, 'a> {
    /// Pass `ê` and `d̂` between the subsolvers.
    pub warm_start: bool,
    /// Defaults to `20 (m + n)`.
    pub max_iters: Option<usize>,
    /// Print one line per iteration to stderr.
    pub trace: bool,
    /// Check every breakpoint with [`check_optimal_pair`] at this tolerance.
    pub verify_tol: Option<f64>,
    pub snapshot: Option<&'h mut dyn FnMut(Snapshot<'_, 'a>)>,
}

impl Default for HomotopyOptions<'_, '_> {
    fn default() -> Self {
        Self {
            warm_start: true,
            max_iters: None,
            trace: false,
            verify_tol: None,
            snapshot: None,
        }
    }
}

pub fn solve_path(inst: &ProblemInstance) -> SolutionPath {
    solve_path_with(inst, HomotopyOptions::default())
}

pub fn solve_path_with<'a>(inst: &'a ProblemInstance, mut opts: HomotopyOptions<'_, 'a>) -> SolutionPath {
    let (m, n) = (inst.rows(), inst.cols());
    let target = inst.delta;
    let delta0 = initial_delta(inst);
    let mut stats = PathStats::default();
    let zero_x = vec![0.0; n];
    let zero_y = vec![0.0; m];

    if target >= delta0 {
        let sets = IndexSets::from_pair(inst, &zero_x, &zero_y, target).expect("dimensions");
        return SolutionPath {
            breakpoints: vec![PathBreakpoint {
                k: 0,
                delta_k: target,
                x: zero_x,
                y: zero_y,
                sets,
                t_step: 0.0,
            }],
            terminated: Termination::TargetReached,
            target,
            stats,
        };
    }

    let mut sets = IndexSets::from_pair(inst, &zero_x, &zero_y, delta0).expect("dimensions");
    let start_rows = IndexSet::from_predicate(m, |i| inst.b[i].abs() >= delta0 * (1.0 - START_TIE_TOL));
    sets.residual_signs = start_rows.iter().map(|i| -inst.b[i].signum()).collect();
    sets.i_p = start_rows;
    let mut path = vec![PathBreakpoint {
        k: 0,
        delta_k: delta0,
        x: zero_x,
        y: zero_y,
        sets,
        t_step: 0.0,
    }];
    let cap = opts.max_iters.unwrap_or(20 * (m + n));
    let mut warm_e: Option<Vec<f64>> = None;

    let fail = |path: Vec<PathBreakpoint>, stats: PathStats, msg: String| SolutionPath {
        breakpoints: path,
        terminated: Termination::Failure(msg),
        target,
        stats,
    };

    for k in 0..cap {
        let current = path.last().expect("nonempty");
        let delta_k = current.delta_k;
        let mut outcome = None;
        for attempt in 0..2 {
            let warm = opts.warm_start && attempt == 0;
            match iterate(inst, current, if warm { warm_e.clone() } else { None }, warm, &mut opts, &mut stats) {
                Ok(step) if step.t > MIN_STEP => {
                    outcome = Some(Ok(step));
                    break;
                }
                Ok(step) => {
                    outcome = Some(Err(format!(
                        "degenerate step t = {:e} at iteration {k} (δ = {delta_k})",
                        step.t
                    )));
                }
                Err(e) => outcome = Some(Err(format!("iteration {k} (δ = {delta_k}): {e}"))),
            }
            if attempt == 0 {
                stats.retries += 1;
            }
        }
        let step = match outcome.expect("at least one attempt") {
            Ok(step) => step,
            Err(msg) => return fail(path, stats, msg),
        };

        let clock = Instant::now();
        let delta_next = if step.reached_target { target } else { delta_k - step.t };
        let sets = match IndexSets::from_pair(inst, &step.x, &step.y, delta_next) {
            Ok(s) => s,
            Err(e) => return fail(path, stats, e.to_string()),
        };
        stats.refresh_time += clock.elapsed();

        if let Some(tol) = opts.verify_tol {
            if !check_optimal_pair(inst, &step.x, &step.y, delta_next, tol) {
                let msg = format!("breakpoint {} at δ = {delta_next} failed the optimality check", k + 1);
                return fail(path, stats, msg);
            }
        }
        if opts.trace {
            eprintln!(
                "k={:<4} delta={:<14.8e} t={:<12.4e} |J_P|={:<4} |I_P|={:<4} |J_D|={:<4} |I_D|={:<4} dual_it={:<4} primal_it={}",
                k + 1,
                delta_next,
                delta_k - delta_next,
                sets.j_p.len(),
                sets.i_p.len(),
                sets.j_d.len(),
                sets.i_d.len(),
                step.dual_iterations,
                step.primal_iterations
            );
        }
        warm_e = step.e_hat;
        path.push(PathBreakpoint {
            k: k + 1,
            delta_k: delta_next,
            x: step.x,
            y: step.y,
            sets,
            t_step: delta_k - delta_next,
        });
        if step.reached_target {
            return SolutionPath {
                breakpoints: path,
                terminated: Termination::TargetReached,
                target,
                stats,
            };
        }
    }
    fail(path, stats, format!("iteration limit of {cap} reached"))
}

struct IterationOutcome {
    x: Vec<f64>,
    y: Vec<f64>,
    t: f64,
    e_hat: Option<Vec<f64>>,
    reached_target: bool,
    dual_iterations: usize,
    primal_iterations: usize,
}

fn iterate<'a>(
    inst: &'a ProblemInstance,
    current: &PathBreakpoint,
    warm_e: Option<Vec<f64>>,
    warm: bool,
    opts: &mut HomotopyOptions<'_, 'a>,
    stats: &mut PathStats,
) -> Result<IterationOutcome> {
    let delta_k = current.delta_k;
    let mut y_start = current.y.clone();
    for (i, yi) in y_start.iter_mut().enumerate() {
        if !current.sets.i_p.contains(i) {
            *yi = 0.0;
        }
    }
    let dual_ctx = DualContext {
        inst,
        x_k: current.x.clone(),
        sets: current.sets.clone(),
        y_start,
        warm_direction: warm_e,
    };
    if let Some(hook) = opts.snapshot.as_mut() {
        hook(Snapshot::Dual(&dual_ctx));
    }
    let clock = Instant::now();
    let dual = dual_update(&dual_ctx);
    stats.dual_time += clock.elapsed();
    let dual = dual?;
    stats.dual_iterations += dual.iterations;

    let clock = Instant::now();
    let sets = IndexSets::from_pair(inst, &current.x, &dual.y, delta_k)?;
    let mut mixed = current.sets.clone();
    mixed.j_d = sets.j_d;
    mixed.i_d = sets.i_d;
    mixed.dual_signs = sets.dual_signs;
    stats.refresh_time += clock.elapsed();

    let primal_ctx = PrimalContext {
        inst,
        y_next: dual.y.clone(),
        delta_k,
        delta_target: inst.delta,
        x_start: current.x.clone(),
        sets: mixed,
        warm_direction: warm.then(|| dual.d_hat.clone()),
    };
    if let Some(hook) = opts.snapshot.as_mut() {
        hook(Snapshot::Primal(&primal_ctx));
    }
    let clock = Instant::now();
    let primal = primal_update(&primal_ctx);
    stats.primal_time += clock.elapsed();
    let primal = primal?;
    stats.primal_iterations += primal.iterations;

    Ok(IterationOutcome {
        x: primal.x,
        y: dual.y,
        t: primal.t,
        e_hat: primal.e_hat,
        reached_target: primal.reached_target,
        dual_iterations: dual.iterations,
        primal_iterations: primal.iterations,
    })
}

/// Primal and dual solution at `delta_query` on a computed path.
///
/// `x` is interpolated linearly between the bracketing breakpoints and `y`
/// is the certificate of the covering segment.
pub fn eval_path(path: &SolutionPath, delta_query: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = &path.breakpoints[0];
    let last = path.last();
    if !(delta_query >= last.delta_k && delta_query <= first.delta_k) {
        return Err(Error::OutOfRange {
            value: delta_query,
            lo: last.delta_k,
            hi: first.delta_k,
        });
    }
    for bp in &path.breakpoints {
        if bp.delta_k == delta_query {
            return Ok((bp.x.clone(), bp.y.clone()));
        }
    }
    for w in path.breakpoints.windows(2) {
        let (hi, lo) = (&w[0], &w[1]);
        if delta_query < hi.delta_k && delta_query > lo.delta_k {
            let s = (hi.delta_k - delta_query) / (hi.delta_k - lo.delta_k);
            let x = hi
                .x
                .iter()
                .zip(&lo.x)
                .map(|(a, b)| a + s * (b - a))
                .collect();
            return Ok((x, lo.y.clone()));
        }
    }
    unreachable!("query inside the breakpoint range")
}

/// Feasibility of the two alternative direction systems at an optimal pair.
pub fn check_alternatives(
    inst: &ProblemInstance,
    x_hat: &[f64],
    y_hat: &[f64],
    delta_hat: f64,
) -> Result<(bool, bool)> {
    let delta0 = norm_inf(&inst.b);
    if !(0.0..delta0).contains(&delta_hat) {
        return Err(Error::OutOfRange {
            value: delta_hat,
            lo: 0.0,
            hi: delta0,
        });
    }
    if !check_optimal_pair(inst, x_hat, y_hat, delta_hat, 1e-8) {
        return Err(Error::Precondition("not an optimal pair".into()));
    }
    oracle::alternative_systems(inst, x_hat, y_hat, delta_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use approx::assert_abs_diff_eq;

    fn scalar(delta: f64) -> ProblemInstance {
        ProblemInstance::new(DenseMatrix::from_rows(&[vec![1.0]]).unwrap(), vec![2.0], delta).unwrap()
    }

    #[test]
    fn scalar_path() {
        let path = solve_path(&scalar(0.0));
        assert!(path.is_complete());
        assert_eq!(path.breakpoints.len(), 2);
        assert_eq!(path.breakpoints[0].delta_k, 2.0);
        assert_eq!(path.breakpoints[1].delta_k, 0.0);
        assert_abs_diff_eq!(path.breakpoints[1].x[0], 2.0, epsilon = 1e-14);
        let (x, y) = eval_path(&path, 1.0).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-14);
        assert!(eval_path(&path, 2.5).is_err());
    }

    #[test]
    fn identity_soft_threshold() {
        let inst = ProblemInstance::new(DenseMatrix::identity(2), vec![3.0, -0.5], 0.0).unwrap();
        let path = solve_path(&inst);
        assert!(path.is_complete());
        let deltas: Vec<f64> = path.breakpoints.iter().map(|b| b.delta_k).collect();
        assert_eq!(deltas.len(), 3);
        assert_abs_diff_eq!(deltas[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(path.breakpoints[1].x[0], 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(path.breakpoints[2].x[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(path.breakpoints[2].x[1], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn large_target_gives_zero() {
        let path = solve_path(&scalar(5.0));
        assert!(path.is_complete());
        assert_eq!(path.breakpoints.len(), 1);
        assert_eq!(path.breakpoints[0].x, vec![0.0]);
    }

    #[test]
    fn alternatives_along_scalar_path() {
        let inst = scalar(0.0);
        assert!(check_alternatives(&inst, &[0.0], &[-1.0], 1.999).is_err());
        assert_eq!(check_alternatives(&inst, &[0.5], &[-1.0], 1.5).unwrap(), (false, true));
        assert!(check_alternatives(&inst, &[0.5], &[1.0], 1.5).is_err());
    }
}
