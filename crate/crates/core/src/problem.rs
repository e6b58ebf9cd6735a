//! Problem data, index sets and optimality tests shared by all solvers.

use crate::asm::{ACTIVE_TOL, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{norm1, norm_inf, sign, DenseMatrix, IndexSet};

/// The problem `min ‖x‖₁  s.t.  ‖Ax − b‖∞ ≤ δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub delta: f64,
}

impl ProblemInstance {
    pub fn new(a: DenseMatrix, b: Vec<f64>, delta: f64) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be nonempty, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "b has length {} but A has {} rows",
                b.len(),
                a.rows()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("b"));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::OutOfRange {
                value: delta,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { a, b, delta })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), delta)
    }

    /// `Ax − b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.a.mul_vec(x);
        r.iter_mut().zip(&self.b).for_each(|(ri, bi)| *ri -= bi);
        r
    }

    /// Dual objective `−bᵀy − δ‖y‖₁`.
    pub fn dual_objective(&self, y: &[f64], delta: f64) -> f64 {
        -crate::linalg::dot(&self.b, y) - delta * norm1(y)
    }

    /// `|‖x‖₁ − (−bᵀy − δ‖y‖₁)|`.
    pub fn duality_gap(&self, x: &[f64], y: &[f64], delta: f64) -> f64 {
        (norm1(x) - self.dual_objective(y, delta)).abs()
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.cols() || y.len() != self.rows() {
            return Err(Error::Dimension(format!(
                "x:{} y:{} for a {}x{} instance",
                x.len(),
                y.len(),
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

/// Primal support, tight rows, dual active columns and dual support.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSets {
    pub j_p: IndexSet,
    pub i_p: IndexSet,
    pub j_d: IndexSet,
    pub i_d: IndexSet,
    /// `sign(x)` on `j_p`.
    pub primal_signs: Vec<f64>,
    /// `sign(Ax − b)` on `i_p`.
    pub residual_signs: Vec<f64>,
    /// `sign(y)` on `i_d`.
    pub dual_signs: Vec<f64>,
}

/// Row `i` is tight iff `| |aᵢᵀx − bᵢ| − δ | ≤ ACTIVE_TOL (1 + δ)`.
pub fn tight_rows(inst: &ProblemInstance, x: &[f64], delta: f64) -> IndexSet {
    let r = inst.residual(x);
    IndexSet::from_predicate(inst.rows(), |i| {
        (r[i].abs() - delta).abs() <= ACTIVE_TOL * (1.0 + delta)
    })
}

pub fn primal_support(x: &[f64]) -> IndexSet {
    IndexSet::from_predicate(x.len(), |j| x[j].abs() > SUPPORT_TOL)
}

/// Column `j` is dual active iff `|A_jᵀy| ≥ 1 − ACTIVE_TOL`.
pub fn dual_active_cols(inst: &ProblemInstance, y: &[f64]) -> IndexSet {
    let g = inst.a.tr_mul_vec(y);
    IndexSet::from_predicate(inst.cols(), |j| g[j].abs() >= 1.0 - ACTIVE_TOL)
}

pub fn dual_support(y: &[f64]) -> IndexSet {
    IndexSet::from_predicate(y.len(), |i| y[i].abs() > SUPPORT_TOL)
}

impl IndexSets {
    /// Derives all four sets from a pair `(x, y)` at parameter `delta`.
    pub fn from_pair(inst: &ProblemInstance, x: &[f64], y: &[f64], delta: f64) -> Result<Self> {
        inst.check_dims(x, y)?;
        let j_p = primal_support(x);
        let i_p = tight_rows(inst, x, delta);
        let r = inst.residual(x);
        Ok(Self {
            primal_signs: j_p.iter().map(|j| sign(x[j])).collect(),
            residual_signs: i_p.iter().map(|i| sign(r[i])).collect(),
            j_d: dual_active_cols(inst, y),
            i_d: dual_support(y),
            dual_signs: dual_support(y).iter().map(|i| sign(y[i])).collect(),
            j_p,
            i_p,
        })
    }

    /// `J_P ⊆ J_D` and `I_D ⊆ I_P`.
    pub fn containments_hold(&self) -> bool {
        self.j_p.is_subset(&self.j_d) && self.i_d.is_subset(&self.i_p)
    }
}

/// Tests `−Aᵀy ∈ Sign(x)` and `Ax − b ∈ δ·Sign(y)` within `tol`.
///
/// Entries of `x` or `y` of magnitude at most `tol` count as zero.
pub fn check_optimal_pair(
    inst: &ProblemInstance,
    x: &[f64],
    y: &[f64],
    delta: f64,
    tol: f64,
) -> bool {
    if inst.check_dims(x, y).is_err() || x.iter().chain(y).any(|v| !v.is_finite()) {
        return false;
    }
    let g = inst.a.tr_mul_vec(y);
    let dual_ok = x.iter().zip(&g).all(|(&xj, &gj)| {
        if xj.abs() <= tol {
            gj.abs() <= 1.0 + tol
        } else {
            (-gj - sign(xj)).abs() <= tol
        }
    });
    let r = inst.residual(x);
    let rtol = tol * (1.0 + delta);
    let primal_ok = r.iter().zip(y).all(|(&ri, &yi)| {
        if yi.abs() <= tol {
            ri.abs() <= delta + rtol
        } else {
            (ri - delta * sign(yi)).abs() <= rtol
        }
    });
    dual_ok && primal_ok
}

/// `‖b‖∞`, the parameter value where the path starts.
pub fn initial_delta(inst: &ProblemInstance) -> f64 {
    norm_inf(&inst.b)
}
