//! Dense complex linear algebra and polynomial roots, sized for systems of at
//! most a few dozen unknowns.

use std::ops::{Index, IndexMut};

pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result, Warning};

/// Pivots at or below this fraction of the largest entry count as zero.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;
/// Condition estimates above this raise [`Warning::IllConditioned`].
pub const ILL_CONDITIONED_THRESHOLD: f64 = 1e12;

const ROOT_MAX_ITER: usize = 1000;
const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        CMatrix::from_fn(rows.len(), cols, |i, j| Complex::new(rows[i][j], 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        CMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

/// Solution of a linear system with its conditioning diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<Complex>,
    /// Infinity-norm condition number `‖A‖·‖A⁻¹‖` computed from the LU factors.
    pub condition_estimate: f64,
    pub warning: Option<Warning>,
}

/// LU factorization with partial pivoting, `P A = L U` stored in place.
struct Lu {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Lu> {
        let n = a.rows;
        let threshold = SINGULAR_PIVOT_RATIO * a.max_modulus();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty column");
            if pivot.is_nan() || threshold.is_nan() || pivot <= threshold {
                return Err(Error::SingularMatrix { column: k, pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = lu[(k, k)].inv();
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv;
                lu[(i, k)] = factor;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    fn solve(&self, b: &[Complex]) -> Vec<Complex> {
        let n = self.n;
        let mut x: Vec<Complex> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                acc -= self.lu[(i, j)] * xj;
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= self.lu[(i, j)] * xj;
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    fn inverse_norm_inf(&self) -> f64 {
        let n = self.n;
        let mut row_sums = vec![0.0; n];
        let mut e = vec![Complex::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex::new(1.0, 0.0);
            for (sum, z) in row_sums.iter_mut().zip(self.solve(&e)) {
                *sum += z.norm();
            }
            e[j] = Complex::new(0.0, 0.0);
        }
        row_sums.into_iter().fold(0.0, f64::max)
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting on modulus.
pub fn solve_linear(a: &CMatrix, b: &[Complex]) -> Result<LinearSolution> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let lu = Lu::factor(a)?;
    let x = lu.solve(b);
    let condition_estimate = a.norm_inf() * lu.inverse_norm_inf();
    let warning = (condition_estimate.is_nan() || condition_estimate > ILL_CONDITIONED_THRESHOLD)
        .then(|| {
            log::debug!("linear system condition estimate {condition_estimate:e}");
            Warning::IllConditioned {
                estimate: condition_estimate,
            }
        });
    Ok(LinearSolution {
        x,
        condition_estimate,
        warning,
    })
}

/// Least-squares solution of an overdetermined system via the normal
/// equations `AᴴA x = Aᴴb`.
pub fn least_squares(a: &CMatrix, b: &[Complex]) -> Result<LinearSolution> {
    if a.rows < a.cols {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.rows, a.cols
        )));
    }
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    if a.is_square() {
        return solve_linear(a, b);
    }
    let ah = a.conj_transpose();
    solve_linear(&ah.matmul(a), &ah.mul_vec(b))
}

/// Linear-prediction system of order `m`: `H[i][j] = samples[i + j]` and
/// `r[i] = -samples[i + m]` for `i < N - m`.
///
/// The least-squares solution `a` gives the monic characteristic polynomial
/// `z^m + a[m-1] z^(m-1) + … + a[0]`.
pub fn hankel_system(samples: &[Complex], order: usize) -> Result<(CMatrix, Vec<Complex>)> {
    let n = samples.len();
    if order == 0 {
        return Err(Error::InvalidArgument(
            "prediction order must be >= 1".into(),
        ));
    }
    if n < 2 * order {
        return Err(Error::InsufficientData(format!(
            "order {order} linear prediction needs at least {} samples, got {n}",
            2 * order
        )));
    }
    let rows = n - order;
    let h = CMatrix::from_fn(rows, order, |i, j| samples[i + j]);
    let r = (0..rows).map(|i| -samples[i + order]).collect();
    Ok((h, r))
}

/// Evaluates `p(z) = Σ coeffs[k] z^k` and its derivative by Horner's rule.
pub fn poly_eval(coeffs: &[Complex], z: Complex) -> (Complex, Complex) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)| / Σ |coeffs[k]| max(1, |z|)^k`, a normwise backward error of a root.
pub fn root_residual(coeffs: &[Complex], z: Complex) -> f64 {
    let (p, _) = poly_eval(coeffs, z);
    let r = z.norm().max(1.0);
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// All roots of `Σ coeffs[k] z^k` (ascending powers) by Aberth–Ehrlich
/// iteration from points on a circle rotated off the real axis.
pub fn poly_roots(coeffs: &[Complex]) -> Result<Vec<Complex>> {
    let Some(&lead) = coeffs.last() else {
        return Err(Error::InvalidArgument("empty polynomial".into()));
    };
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Err(Error::InvalidArgument(
            "polynomial of degree 0 has no roots".into(),
        ));
    }
    if lead.norm() == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient is zero".into()));
    }
    let monic: Vec<Complex> = coeffs.iter().map(|c| c / lead).collect();
    if degree == 1 {
        return Ok(vec![-monic[0]]);
    }

    let radius = (0..degree)
        .map(|k| monic[k].norm().powf(1.0 / (degree - k) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let center = -monic[degree - 1] / degree as f64;
    let mut roots: Vec<Complex> = (0..degree)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / degree as f64 + 0.4;
            center + Complex::from_polar(radius, theta)
        })
        .collect();

    let mut converged = vec![false; degree];
    for _ in 0..ROOT_MAX_ITER {
        let mut moving = false;
        for k in 0..degree {
            if converged[k] {
                continue;
            }
            let z = roots[k];
            let (p, dp) = poly_eval(&monic, z);
            if p.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex = (0..degree)
                .filter(|&j| j != k)
                .map(|j| (z - roots[j]).inv())
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            roots[k] = z - step;
            if step.norm() <= 4.0 * f64::EPSILON * roots[k].norm()
                || root_residual(&monic, roots[k]) <= f64::EPSILON
            {
                converged[k] = true;
            } else {
                moving = true;
            }
        }
        if !moving {
            break;
        }
    }

    let worst = roots
        .iter()
        .map(|&z| root_residual(&monic, z))
        .fold(0.0, f64::max);
    if worst.is_nan() || worst > ROOT_RESIDUAL_TOL {
        return Err(Error::RootConvergence {
            iterations: ROOT_MAX_ITER,
            residual: worst,
        });
    }
    Ok(roots)
}

/// Monic polynomial coefficients (ascending) with the given roots.
pub fn poly_from_roots(roots: &[Complex]) -> Vec<Complex> {
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}
