//! Instances with known optimal solutions and the two-sided-bounds transform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, norm_inf, sign, DenseMatrix};
use crate::oracle;
use crate::problem::{check_optimal_pair, ProblemInstance};

/// Attempts made by [`random_bp_pair`] before giving up.
pub const RETRY_CAP: usize = 25;
const CERTIFICATE_TOL: f64 = 1e-10;

/// An instance together with an optimal pair `(x̄, ȳ)` at its target `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthInstance {
    pub inst: ProblemInstance,
    pub x_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
}

/// How the certificate `ȳ` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateRegime {
    /// Minimum ℓ1-norm certificate; few nonzeros.
    Sparse,
    /// Minimum 2-norm solution of the support equations, pulled back into
    /// the feasible box when needed; typically all nonzeros.
    Dense,
}

/// Builds `b̂ = Ax̄ − δ·sign(ȳ)` so that `(x̄, ȳ)` is optimal at `δ`.
pub fn make_ground_truth(
    a: &DenseMatrix,
    x_bar: &[f64],
    y_bar: &[f64],
    delta: f64,
) -> Result<GroundTruthInstance> {
    if x_bar.len() != a.cols() || y_bar.len() != a.rows() {
        return Err(Error::Dimension("ground-truth vectors".into()));
    }
    let g = a.tr_mul_vec(y_bar);
    let certified = x_bar.iter().zip(&g).all(|(&xj, &gj)| {
        if xj == 0.0 {
            gj.abs() <= 1.0 + CERTIFICATE_TOL
        } else {
            (-gj - sign(xj)).abs() <= CERTIFICATE_TOL
        }
    });
    if !certified {
        return Err(Error::Precondition(
            "y_bar does not certify x_bar: −Aᵀy ∉ Sign(x)".into(),
        ));
    }
    let mut b = a.mul_vec(x_bar);
    for (bi, &yi) in b.iter_mut().zip(y_bar) {
        *bi -= delta * sign(yi);
    }
    let inst = ProblemInstance::new(a.clone(), b, delta)?;
    if !check_optimal_pair(&inst, x_bar, y_bar, delta, 1e-9) {
        return Err(Error::Precondition("constructed pair is not optimal".into()));
    }
    Ok(GroundTruthInstance {
        inst,
        x_bar: x_bar.to_vec(),
        y_bar: y_bar.to_vec(),
    })
}

/// Gaussian matrix with unit 2-norm columns.
pub fn gaussian_matrix(m: usize, n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut a = DenseMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal));
    let norms: Vec<f64> = (0..n)
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    a = DenseMatrix::from_fn(m, n, |i, j| a.get(i, j) / norms[j]);
    a
}

/// Random `(A, x̄)` where `x̄` is verified optimal for `min ‖x‖₁ s.t. Ax = Ax̄`.
pub fn random_bp_pair(
    m: usize,
    n: usize,
    sparsity: usize,
    dynamic_range: f64,
    seed: u64,
) -> Result<(DenseMatrix, Vec<f64>)> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if 2 * sparsity > m || sparsity > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity {sparsity} too large for {m}x{n}; at most m/2 nonzeros are supported"
        )));
    }
    if !(dynamic_range >= 0.0 && dynamic_range.is_finite()) {
        return Err(Error::InvalidArgument("dynamic range must be a finite nonnegative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_CAP {
        let a = gaussian_matrix(m, n, &mut rng);
        let mut x = vec![0.0; n];
        let mut support = sample(&mut rng, n, sparsity).into_vec();
        support.sort_unstable();
        for j in support {
            let magnitude = 10f64.powf(rng.gen::<f64>() * dynamic_range);
            x[j] = if rng.gen::<bool>() { magnitude } else { -magnitude };
        }
        if sparsity == 0 || oracle::is_bp_optimal(&a, &x, 1e-9)? {
            return Ok((a, x));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no basis-pursuit optimal draw within {RETRY_CAP} attempts; lower the sparsity"
    )))
}

/// Certificate `ȳ` with `−Aᵀȳ ∈ Sign(x̄)` in the requested regime.
pub fn certificate(a: &DenseMatrix, x_bar: &[f64], regime: CertificateRegime) -> Result<Vec<f64>> {
    let mut sparse = oracle::certificate_l1(a, x_bar)?;
    snap_small(&mut sparse);
    if regime == CertificateRegime::Sparse {
        return Ok(sparse);
    }
    let support: Vec<usize> = (0..x_bar.len()).filter(|&j| x_bar[j] != 0.0).collect();
    let all_rows: Vec<usize> = (0..a.rows()).collect();
    let sys = a.select(&all_rows, &support).transpose();
    let rhs: Vec<f64> = support.iter().map(|&j| -sign(x_bar[j])).collect();
    let ls = linalg::solve_consistent(&sys, &rhs, 1e-10)?
        .solution
        .ok_or_else(|| Error::Precondition("support equations have no solution".into()))?;
    // largest weight on the least-squares point that keeps |A_jᵀy| ≤ 1
    let g1 = a.tr_mul_vec(&sparse);
    let g2 = a.tr_mul_vec(&ls);
    let mut w: f64 = 1.0;
    for j in 0..a.cols() {
        if x_bar[j] != 0.0 {
            continue;
        }
        let slope = g2[j] - g1[j];
        if slope > 0.0 {
            w = w.min((1.0 - g1[j]) / slope);
        } else if slope < 0.0 {
            w = w.min((-1.0 - g1[j]) / slope);
        }
    }
    let w = w.clamp(0.0, 1.0);
    let mut y: Vec<f64> = sparse.iter().zip(&ls).map(|(s, l)| (1.0 - w) * s + w * l).collect();
    snap_small(&mut y);
    Ok(y)
}

fn snap_small(y: &mut [f64]) {
    y.iter_mut().for_each(|v| {
        if v.abs() < 1e-12 {
            *v = 0.0
        }
    });
}

/// Random ground-truth instance: `random_bp_pair`, a certificate, then `b̂`.
pub fn random_ground_truth(
    m: usize,
    n: usize,
    sparsity: usize,
    dynamic_range: f64,
    delta: f64,
    regime: CertificateRegime,
    seed: u64,
) -> Result<GroundTruthInstance> {
    let (a, x_bar) = random_bp_pair(m, n, sparsity, dynamic_range, seed)?;
    let y_bar = certificate(&a, &x_bar, regime)?;
    make_ground_truth(&a, &x_bar, &y_bar, delta)
}

/// Gaussian `A` and `b` with `δ` uniform in `(0, ‖b‖∞)`.
pub fn random_instance(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DenseMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal));
    let b: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let frac: f64 = rng.gen_range(0.01..0.99);
    let delta = frac * norm_inf(&b);
    ProblemInstance::new(a, b, delta)
}

/// `α ≤ Ax − b ≤ β` with `α < β`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedBounds {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GeneralizedBounds {
    pub fn new(a: DenseMatrix, b: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let m = a.rows();
        if b.len() != m || alpha.len() != m || beta.len() != m {
            return Err(Error::Dimension("bound vectors".into()));
        }
        if let Some(i) = (0..m).find(|&i| !(alpha[i] < beta[i])) {
            return Err(Error::InvalidArgument(format!(
                "lower bound {} not below upper bound {} in row {i}",
                alpha[i], beta[i]
            )));
        }
        Ok(Self { a, b, alpha, beta })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let ax = self.a.mul_vec(x);
        (0..self.b.len()).all(|i| {
            let r = ax[i] - self.b[i];
            self.alpha[i] <= r && r <= self.beta[i]
        })
    }
}

/// Rescales rows so that the bounds become `‖GAx − Gb̃‖∞ ≤ δ̂` with
/// `γ = (β − α)/2`, `b̃ = b + (α + β)/2` and `G = diag(δ̂/γ)`.
pub fn to_linf_form(gb: &GeneralizedBounds, delta_hat: f64) -> Result<(DenseMatrix, Vec<f64>)> {
    if !(delta_hat > 0.0 && delta_hat.is_finite()) {
        return Err(Error::OutOfRange {
            value: delta_hat,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let m = gb.a.rows();
    if let Some(i) = (0..m).find(|&i| !(gb.alpha[i] < gb.beta[i])) {
        return Err(Error::InvalidArgument(format!("empty bound interval in row {i}")));
    }
    let g: Vec<f64> = (0..m)
        .map(|i| delta_hat / ((gb.beta[i] - gb.alpha[i]) / 2.0))
        .collect();
    let ga = DenseMatrix::from_fn(m, gb.a.cols(), |i, j| g[i] * gb.a.get(i, j));
    let gb_tilde = (0..m)
        .map(|i| g[i] * (gb.b[i] + (gb.alpha[i] + gb.beta[i]) / 2.0))
        .collect();
    Ok((ga, gb_tilde))
}
