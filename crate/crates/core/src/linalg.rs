//! Dense matrices, index sets and a rank-revealing least-squares kernel.
//!
//! Every direction and multiplier system in the active-set solvers is a small,
//! possibly rectangular and rank-deficient dense system. [`solve_consistent`]
//! answers the question "does this system have a solution?" and, if it does,
//! returns the minimum-norm one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for [`solve_consistent`].
pub const DEFAULT_SOLVE_TOL: f64 = 1e-9;

/// Relative threshold on the diagonal of the pivoted triangular factor below
/// which a column is considered linearly dependent.
const RANK_TOL: f64 = 1e-11;

/// A dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixRepr> for DenseMatrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        DenseMatrix::new(r.rows, r.cols, r.data)
    }
}

impl From<DenseMatrix> for MatrixRepr {
    fn from(m: DenseMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix entry by entry. Panics if `f` returns a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite matrix entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mul_vec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    /// `A_jᵀ y` for a single column.
    pub fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        (0..self.rows).map(|i| self.get(i, j) * y[i]).sum()
    }

    /// Selects rows and columns by position without bounds validation beyond
    /// the usual indexing panics.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// Vertically stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(Error::Dimension(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }
}

/// A strictly increasing set of 0-based positions inside `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, universe: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Unsorted);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= universe) {
            return Err(Error::IndexOutOfRange { index, universe });
        }
        Ok(Self { indices, universe })
    }

    /// Sorts and deduplicates before validating the range.
    pub fn from_unsorted(mut indices: Vec<usize>, universe: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, universe)
    }

    pub fn empty(universe: usize) -> Self {
        Self {
            indices: Vec::new(),
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            indices: (0..universe).collect(),
            universe,
        }
    }

    /// Positions where `pred` holds.
    pub fn from_predicate(universe: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        Self {
            indices: (0..universe).filter(|&i| pred(i)).collect(),
            universe,
        }
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Position of `i` inside the set.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    /// Inserts `i`; returns whether it was newly added.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        match self.indices.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, i);
                true
            }
        }
    }

    /// Removes `i`; returns whether it was present.
    pub fn remove(&mut self, i: usize) -> bool {
        match self.indices.binary_search(&i) {
            Ok(pos) => {
                self.indices.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn clear(&mut self) {
        self.indices.clear();
    }

    pub fn complement(&self) -> Self {
        Self::from_predicate(self.universe, |i| !self.contains(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v: Vec<usize> = self.indices.iter().chain(&other.indices).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self {
            indices: v,
            universe: self.universe.max(other.universe),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
            universe: self.universe,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|&i| other.contains(i))
                .collect(),
            universe: self.universe,
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Composition `self[inner]`: picks the members of `self` at the
    /// positions listed in `inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.universe != self.len() {
            return Err(Error::Dimension(format!(
                "inner universe {} against outer size {}",
                inner.universe,
                self.len()
            )));
        }
        Ok(Self {
            indices: inner.iter().map(|p| self.indices[p]).collect(),
            universe: self.universe,
        })
    }
}

/// Outcome of [`solve_consistent`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    /// Minimum-norm solution, present iff the system is consistent.
    pub solution: Option<Vec<f64>>,
    /// `‖M x − rhs‖∞` at the returned solution, or at the least-squares
    /// point when the system is inconsistent.
    pub residual_norm: f64,
    pub consistent: bool,
}

/// `A[rows, cols]` with bounds checking.
pub fn submatrix(a: &DenseMatrix, rows: &IndexSet, cols: &IndexSet) -> Result<DenseMatrix> {
    for (set, bound) in [(rows, a.rows()), (cols, a.cols())] {
        if let Some(index) = set.iter().find(|&i| i >= bound) {
            return Err(Error::IndexOutOfRange {
                index,
                universe: bound,
            });
        }
    }
    Ok(a.select(rows.as_slice(), cols.as_slice()))
}

/// Solves `M x = rhs` for a possibly rectangular, rank-deficient `M`.
///
/// The system is declared consistent iff the least-squares residual satisfies
/// `‖M x − rhs‖∞ ≤ tol · (1 + ‖rhs‖∞)`; the minimum 2-norm solution is returned
/// in that case.
pub fn solve_consistent(m: &DenseMatrix, rhs: &[f64], tol: f64) -> Result<SolveReport> {
    if rhs.len() != m.rows() {
        return Err(Error::Dimension(format!(
            "rhs of length {} for {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let x = min_norm_lstsq(m, rhs);
    let residual_norm = residual_inf(m, &x, rhs);
    let consistent = residual_norm <= tol * (1.0 + norm_inf(rhs));
    Ok(SolveReport {
        solution: consistent.then_some(x),
        residual_norm,
        consistent,
    })
}

fn residual_inf(m: &DenseMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    (0..m.rows())
        .map(|i| (dot(m.row(i), x) - rhs[i]).abs())
        .fold(0.0, f64::max)
}

/// Householder reflector stored as (v, tau) with `H = I − tau v vᵀ`, v[0] = 1.
struct Reflector {
    v: Vec<f64>,
    tau: f64,
}

/// Column-major working copy with in-place Householder QR.
struct Qr {
    m: usize,
    n: usize,
    /// column-major storage of R (upper part) after factorisation
    a: Vec<f64>,
    perm: Vec<usize>,
    reflectors: Vec<Reflector>,
}

impl Qr {
    fn factor(m: usize, n: usize, mut a: Vec<f64>, pivot: bool) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::with_capacity(m.min(n));
        for k in 0..m.min(n) {
            if pivot {
                // norms are recomputed each step; the systems here are tiny
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..n {
                    let s: f64 = (k..m).map(|i| a[j * m + i] * a[j * m + i]).sum();
                    if s > best_norm {
                        best_norm = s;
                        best = j;
                    }
                }
                if best != k {
                    for i in 0..m {
                        a.swap(k * m + i, best * m + i);
                    }
                    perm.swap(k, best);
                }
            }
            let col = &a[k * m + k..k * m + m];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                let mut v = vec![0.0; m - k];
                v[0] = 1.0;
                reflectors.push(Reflector { v, tau: 0.0 });
                continue;
            }
            let x0 = col[0];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let v0 = x0 - alpha;
            let mut v = Vec::with_capacity(m - k);
            v.push(1.0);
            v.extend(col[1..].iter().map(|x| x / v0));
            let tau = -v0 / alpha;
            // apply to the trailing columns
            for j in k + 1..n {
                let cj = &mut a[j * m + k..j * m + m];
                let s = tau * dot(&v, cj);
                axpy(-s, &v, cj);
            }
            a[k * m + k] = alpha;
            for i in k + 1..m {
                a[k * m + i] = 0.0;
            }
            reflectors.push(Reflector { v, tau });
        }
        Self {
            m,
            n,
            a,
            perm,
            reflectors,
        }
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.m + i]
    }

    /// Applies `Qᵀ` to `b` in place.
    fn apply_qt(&self, b: &mut [f64]) {
        for (k, h) in self.reflectors.iter().enumerate() {
            let seg = &mut b[k..];
            let s = h.tau * dot(&h.v, seg);
            axpy(-s, &h.v, seg);
        }
    }

    /// Applies `Q` to the first `r` unit-padded coordinates of `z` (length m).
    fn apply_q(&self, z: &mut [f64]) {
        for (k, h) in self.reflectors.iter().enumerate().rev() {
            let seg = &mut z[k..];
            let s = h.tau * dot(&h.v, seg);
            axpy(-s, &h.v, seg);
        }
    }

    fn rank(&self) -> usize {
        let kmax = self.m.min(self.n);
        if kmax == 0 {
            return 0;
        }
        let r00 = self.r(0, 0).abs();
        if r00 == 0.0 {
            return 0;
        }
        let thresh = RANK_TOL * r00 * (self.m.max(self.n) as f64);
        (0..kmax).take_while(|&k| self.r(k, k).abs() > thresh).count()
    }
}

/// Minimum-norm least-squares solution via a complete orthogonal
/// decomposition: `M P = Q [R11 R12; 0 0]`, then an unpivoted QR of
/// `[R11 R12]ᵀ` to eliminate the trailing block.
fn min_norm_lstsq(mat: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let (m, n) = (mat.rows(), mat.cols());
    if n == 0 {
        return Vec::new();
    }
    if m == 0 {
        return vec![0.0; n];
    }
    let mut colmajor = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            colmajor[j * m + i] = mat.get(i, j);
        }
    }
    let qr = Qr::factor(m, n, colmajor, true);
    let r = qr.rank();
    if r == 0 {
        return vec![0.0; n];
    }
    let mut c = rhs.to_vec();
    qr.apply_qt(&mut c);
    let c = &c[..r];

    let z = if r == n {
        back_substitute(r, |i, j| qr.r(i, j), c)
    } else {
        // [R11 R12]ᵀ is n×r; factor it as W U with U upper triangular r×r.
        let mut t = vec![0.0; n * r];
        for i in 0..r {
            for j in i..n {
                // row j, column i of the transpose
                t[i * n + j] = qr.r(i, j);
            }
        }
        let qt = Qr::factor(n, r, t, false);
        // [R11 R12] = Uᵀ Wᵀ: solve Uᵀ w = c, then z = W w
        let mut w = vec![0.0; n];
        for i in 0..r {
            let mut s = c[i];
            for k in 0..i {
                s -= qt.r(k, i) * w[k];
            }
            w[i] = s / qt.r(i, i);
        }
        qt.apply_q(&mut w);
        w
    };
    let mut x = vec![0.0; n];
    for (k, &p) in qr.perm.iter().enumerate() {
        x[p] = z[k];
    }
    x
}

fn back_substitute(r: usize, u: impl Fn(usize, usize) -> f64, c: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; r];
    for i in (0..r).rev() {
        let mut s = c[i];
        for j in i + 1..r {
            s -= u(i, j) * z[j];
        }
        z[i] = s / u(i, i);
    }
    z
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y += a x
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iota(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| (i * cols + j) as f64)
    }

    fn set(ix: &[usize], n: usize) -> IndexSet {
        IndexSet::new(ix.to_vec(), n).unwrap()
    }

    #[test]
    fn submatrix_identity_selection() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = submatrix(&a, &set(&[0, 1], 2), &set(&[0, 1], 2)).unwrap();
        assert_eq!(s, a);
    }

    #[test]
    fn submatrix_single_entry() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = submatrix(&a, &set(&[1], 2), &set(&[0], 2)).unwrap();
        assert_eq!(s.to_rows(), vec![vec![3.0]]);
    }

    #[test]
    fn submatrix_of_iota() {
        // entries by definition: A(i,j) = 4 i + j
        let a = iota(3, 4);
        let s = submatrix(&a, &set(&[0, 2], 3), &set(&[1, 3], 4)).unwrap();
        assert_eq!(s.to_rows(), vec![vec![1.0, 3.0], vec![9.0, 11.0]]);
    }

    #[test]
    fn submatrix_out_of_bounds() {
        let a = iota(2, 2);
        let err = submatrix(&a, &set(&[0, 2], 3), &set(&[0], 2)).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 2, .. }));
    }

    #[test]
    fn matrix_rejects_nan_and_bad_length() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn index_set_validation_and_complement() {
        assert!(matches!(IndexSet::new(vec![2, 1], 3), Err(Error::Unsorted)));
        assert!(matches!(IndexSet::new(vec![1, 1], 3), Err(Error::Unsorted)));
        assert!(IndexSet::new(vec![3], 3).is_err());
        let s = set(&[1, 3], 5);
        assert_eq!(s.complement().as_slice(), &[0, 2, 4]);
        assert!(s.complement().complement() == s);
    }

    #[test]
    fn identity_system() {
        let m = DenseMatrix::identity(2);
        let r = solve_consistent(&m, &[3.0, -1.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(r.consistent);
        assert_eq!(r.solution.unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn overdetermined_inconsistent() {
        // least squares point x = 1.5 leaves residuals ±0.5
        let m = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let r = solve_consistent(&m, &[1.0, 2.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(!r.consistent);
        assert!(r.solution.is_none());
        assert_abs_diff_eq!(r.residual_norm, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn underdetermined_min_norm() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let r = solve_consistent(&m, &[2.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(r.consistent);
        let x = r.solution.unwrap();
        assert_abs_diff_eq!(x[0] + x[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_min_norm() {
        // rank 1, columns 0 and 2 equal, column 1 doubled
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0, 1.0], vec![2.0, 4.0, 2.0]]).unwrap();
        let r = solve_consistent(&m, &[6.0, 12.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(r.consistent);
        let x = r.solution.unwrap();
        // minimum norm solution is parallel to (1, 2, 1)
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_shapes() {
        let m = DenseMatrix::zeros(0, 3);
        let r = solve_consistent(&m, &[], DEFAULT_SOLVE_TOL).unwrap();
        assert!(r.consistent);
        assert_eq!(r.solution.unwrap(), vec![0.0; 3]);

        let m = DenseMatrix::zeros(1, 0);
        let r = solve_consistent(&m, &[1.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(!r.consistent);
        let r = solve_consistent(&m, &[0.0], DEFAULT_SOLVE_TOL).unwrap();
        assert!(r.consistent);
    }

    #[test]
    fn solve_errors() {
        let m = DenseMatrix::identity(2);
        assert!(matches!(
            solve_consistent(&m, &[1.0], 1e-9),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            solve_consistent(&m, &[1.0, f64::INFINITY], 1e-9),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn deterministic() {
        let m = DenseMatrix::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let a = solve_consistent(&m, &rhs, 1e-9).unwrap();
        let b = solve_consistent(&m, &rhs, 1e-9).unwrap();
        assert_eq!(a, b);
    }
}
