//! Exact interpolation of nodes by sums of complex exponentials
//! `f(t) = Σ cⱼ·exp(λⱼ·t)`.
//!
//! Exponents are either supplied or estimated Prony-style: the nodes are
//! resampled onto a uniform grid, a linear-prediction polynomial is fitted to
//! the grid values, and its roots `zₖ` give `λₖ = ln(zₖ)/Δ`. Coefficients then
//! follow from the generalized Vandermonde system `exp(λⱼ·tᵢ)·c = y`.

use crate::error::{Error, Result, Warning};
use crate::geometry::Point2;
use crate::numerics::{hankel_system, least_squares, poly_roots, solve_linear, CMatrix, Complex};
use crate::par;

/// Relative node residual accepted by [`fit`]: `max|f(tᵢ) − yᵢ| ≤ tol·max(1, max|yᵢ|)`.
pub const DEFAULT_INTERPOLATION_TOL: f64 = 1e-8;
/// Largest `|Re(λ)·t|` evaluated before reporting overflow.
pub const MAX_EXPONENT: f64 = 700.0;
/// Exponents with `|Im λ|` at or below this are treated as real.
pub const REAL_EXPONENT_TOL: f64 = 1e-10;

const ROOT_AT_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coefficient: Complex,
    pub exponent: Complex,
}

/// A sum of exponential terms together with the nodes it was fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpModel {
    pub terms: Vec<ExpTerm>,
    pub nodes: Vec<Point2>,
    /// `max |Re f(tᵢ) − yᵢ|` over the nodes.
    pub fit_residual: f64,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub t: f64,
    pub value: f64,
    pub imag_residual: f64,
}

impl ExpModel {
    /// Builds a model from known terms, measuring its residual on `nodes`.
    pub fn from_terms(terms: Vec<ExpTerm>, nodes: Vec<Point2>) -> Result<Self> {
        let mut model = ExpModel {
            terms,
            nodes,
            fit_residual: 0.0,
            warnings: Vec::new(),
        };
        model.fit_residual = model.node_residual()?;
        Ok(model)
    }

    pub fn coefficients(&self) -> Vec<Complex> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    pub fn exponents(&self) -> Vec<Complex> {
        self.terms.iter().map(|t| t.exponent).collect()
    }

    /// `Σ cⱼ·exp(λⱼ·t)` in complex arithmetic.
    pub fn evaluate_complex(&self, t: f64) -> Result<Complex> {
        let mut sum = Complex::new(0.0, 0.0);
        for term in &self.terms {
            let magnitude = (term.exponent.re * t).abs();
            if magnitude.is_nan() || magnitude > MAX_EXPONENT {
                return Err(Error::Overflow { magnitude });
            }
            sum += term.coefficient * (term.exponent * t).exp();
        }
        Ok(sum)
    }

    /// Real part of the model at `t` and the magnitude of its imaginary part.
    pub fn evaluate(&self, t: f64) -> Result<(f64, f64)> {
        let z = self.evaluate_complex(t)?;
        Ok((z.re, z.im.abs()))
    }

    pub fn node_residual(&self) -> Result<f64> {
        self.nodes.iter().try_fold(0.0f64, |worst, p| {
            let (value, _) = self.evaluate(p.x)?;
            Ok(worst.max((value - p.y).abs()))
        })
    }

    /// `tol · max(1, max|yᵢ|)`.
    pub fn residual_bound(&self, tol: f64) -> f64 {
        tol * self.nodes.iter().map(|p| p.y.abs()).fold(1.0, f64::max)
    }

    pub fn check_residual(&self, tol: f64) -> Result<()> {
        let bound = self.residual_bound(tol);
        if self.fit_residual <= bound {
            Ok(())
        } else {
            Err(Error::ResidualTolerance {
                residual: self.fit_residual,
                bound,
            })
        }
    }
}

pub fn evaluate(model: &ExpModel, t: f64) -> Result<(f64, f64)> {
    model.evaluate(t)
}

fn grid_len(t_start: f64, t_stop: f64, step: f64) -> Result<usize> {
    if step.is_nan() || step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if !t_start.is_finite() || !t_stop.is_finite() || t_stop < t_start {
        return Err(Error::InvalidArgument(format!(
            "grid requires finite start <= stop, got {t_start}..{t_stop}"
        )));
    }
    // Tolerate rounding in (stop - start) / step so the stop point stays on the grid.
    Ok(((t_stop - t_start) / step + 1e-9).floor() as usize + 1)
}

fn grid_point(model: &ExpModel, t_start: f64, step: f64, k: usize) -> Result<GridPoint> {
    let t = t_start + k as f64 * step;
    let (value, imag_residual) = model.evaluate(t)?;
    Ok(GridPoint {
        t,
        value,
        imag_residual,
    })
}

/// Evaluates the model on `t_start, t_start + step, …` up to and including `t_stop`.
pub fn evaluate_grid(
    model: &ExpModel,
    t_start: f64,
    t_stop: f64,
    step: f64,
) -> Result<Vec<GridPoint>> {
    let len = grid_len(t_start, t_stop, step)?;
    par::try_map_range(len, |k| grid_point(model, t_start, step, k))
}

pub fn evaluate_grid_sequential(
    model: &ExpModel,
    t_start: f64,
    t_stop: f64,
    step: f64,
) -> Result<Vec<GridPoint>> {
    let len = grid_len(t_start, t_stop, step)?;
    (0..len)
        .map(|k| grid_point(model, t_start, step, k))
        .collect()
}

fn check_distinct_abscissae(nodes: &[Point2]) -> Result<()> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x));
    for w in order.windows(2) {
        if nodes[w[0]].x == nodes[w[1]].x {
            return Err(Error::DuplicateAbscissa {
                t: nodes[w[0]].x,
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }
    Ok(())
}

/// Generalized Vandermonde matrix with entries `exp(exponents[j] · nodes[i].x)`.
pub fn basis_matrix(nodes: &[Point2], exponents: &[Complex]) -> Result<CMatrix> {
    if nodes.is_empty() || exponents.is_empty() {
        return Err(Error::DimensionMismatch(
            "basis needs at least one node and one exponent".into(),
        ));
    }
    check_distinct_abscissae(nodes)?;
    for p in nodes {
        for lambda in exponents {
            let magnitude = (lambda.re * p.x).abs();
            if magnitude.is_nan() || magnitude > MAX_EXPONENT {
                return Err(Error::Overflow { magnitude });
            }
        }
    }
    Ok(CMatrix::from_fn(nodes.len(), exponents.len(), |i, j| {
        (exponents[j] * nodes[i].x).exp()
    }))
}

/// Coefficients making the exponential sum pass exactly through `nodes`.
pub fn solve_coefficients(nodes: &[Point2], exponents: &[Complex]) -> Result<ExpModel> {
    if nodes.len() != exponents.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes but {} exponents; exact interpolation needs equal counts",
            nodes.len(),
            exponents.len()
        )));
    }
    let basis = basis_matrix(nodes, exponents)?;
    let values: Vec<Complex> = nodes.iter().map(|p| Complex::new(p.y, 0.0)).collect();
    let solution = solve_linear(&basis, &values)?;
    build_model(nodes, exponents, solution.x, solution.warning)
}

/// Least-squares fit with fewer exponents than nodes.
pub fn fit_least_squares(nodes: &[Point2], exponents: &[Complex]) -> Result<ExpModel> {
    if exponents.len() > nodes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} exponents exceed {} nodes",
            exponents.len(),
            nodes.len()
        )));
    }
    let basis = basis_matrix(nodes, exponents)?;
    let values: Vec<Complex> = nodes.iter().map(|p| Complex::new(p.y, 0.0)).collect();
    let solution = least_squares(&basis, &values)?;
    build_model(nodes, exponents, solution.x, solution.warning)
}

fn build_model(
    nodes: &[Point2],
    exponents: &[Complex],
    coefficients: Vec<Complex>,
    warning: Option<Warning>,
) -> Result<ExpModel> {
    let terms = coefficients
        .into_iter()
        .zip(exponents)
        .map(|(coefficient, &exponent)| ExpTerm {
            coefficient,
            exponent,
        })
        .collect();
    let mut model = ExpModel::from_terms(terms, nodes.to_vec())?;
    model.warnings.extend(warning);
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSpec {
    Given(Vec<Complex>),
    Estimate {
        m: usize,
        symmetrize: bool,
        resample_count: usize,
    },
}

impl ExponentSpec {
    /// Estimation of `m` exponents on the default grid of `max(4m, 32)` points.
    pub fn estimate(m: usize) -> Self {
        ExponentSpec::Estimate {
            m,
            symmetrize: false,
            resample_count: default_resample_count(m),
        }
    }
}

pub fn default_resample_count(m: usize) -> usize {
    (4 * m).max(32)
}

/// Piecewise-linear resampling of `nodes` onto `count` evenly spaced points
/// spanning their abscissae. Returns the grid spacing and the values.
pub fn resample_uniform(nodes: &[Point2], count: usize) -> Result<(f64, Vec<f64>)> {
    if nodes.len() < 2 || count < 2 {
        return Err(Error::InsufficientData(format!(
            "resampling needs at least 2 nodes and 2 grid points, got {} and {count}",
            nodes.len()
        )));
    }
    check_distinct_abscissae(nodes)?;
    let mut sorted = nodes.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let (t_min, t_max) = (sorted[0].x, sorted[sorted.len() - 1].x);
    let spacing = (t_max - t_min) / (count - 1) as f64;
    let mut segment = 0;
    let values = (0..count)
        .map(|k| {
            let t = if k == count - 1 {
                t_max
            } else {
                t_min + k as f64 * spacing
            };
            while segment + 2 < sorted.len() && t > sorted[segment + 1].x {
                segment += 1;
            }
            let (a, b) = (sorted[segment], sorted[segment + 1]);
            let w = (t - a.x) / (b.x - a.x);
            a.y + w * (b.y - a.y)
        })
        .collect();
    Ok((spacing, values))
}

/// Prony-style exponent estimation from (possibly non-uniform) nodes.
pub fn estimate_exponents(
    nodes: &[Point2],
    m: usize,
    symmetrize: bool,
    resample_count: usize,
) -> Result<Vec<Complex>> {
    if nodes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponent estimation needs at least 3 nodes, got {}",
            nodes.len()
        )));
    }
    if m == 0 || (symmetrize && !m.is_multiple_of(2)) {
        return Err(Error::InvalidArgument(format!(
            "exponent count must be positive{}, got {m}",
            if symmetrize {
                " and even when symmetrizing"
            } else {
                ""
            }
        )));
    }
    if resample_count < 2 * m {
        return Err(Error::InsufficientData(format!(
            "resample count {resample_count} is below 2m = {}",
            2 * m
        )));
    }
    let order = if symmetrize { m / 2 } else { m };
    let (spacing, values) = resample_uniform(nodes, resample_count)?;
    let samples: Vec<Complex> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let (hankel, rhs) = hankel_system(&samples, order)?;
    let prediction = least_squares(&hankel, &rhs)?;

    let mut characteristic = prediction.x;
    characteristic.push(Complex::new(1.0, 0.0));
    let roots = poly_roots(&characteristic)?;

    let mut exponents = Vec::with_capacity(m);
    for (index, z) in roots.into_iter().enumerate() {
        let modulus = z.norm();
        if modulus <= ROOT_AT_ZERO {
            return Err(Error::RootAtZero { index, modulus });
        }
        exponents.push(z.ln() / spacing);
    }
    if symmetrize {
        let negated: Vec<Complex> = exponents.iter().map(|l| -l).collect();
        exponents.extend(negated);
    }
    close_under_conjugation(exponents, m)
}

/// Pairs every complex exponent with its conjugate, snapping each pair to an
/// exact conjugate pair and tiny imaginary parts to zero. Missing partners are
/// appended while the set has fewer than `capacity` members.
pub fn close_under_conjugation(
    mut exponents: Vec<Complex>,
    capacity: usize,
) -> Result<Vec<Complex>> {
    for l in exponents.iter_mut() {
        if l.im.abs() <= REAL_EXPONENT_TOL {
            l.im = 0.0;
        }
    }
    let mut paired = vec![false; exponents.len()];
    let mut missing = Vec::new();
    for i in 0..exponents.len() {
        if paired[i] || exponents[i].im == 0.0 {
            continue;
        }
        paired[i] = true;
        let target = exponents[i].conj();
        let partner = (0..exponents.len())
            .filter(|&j| !paired[j] && exponents[j].im != 0.0)
            .min_by(|&a, &b| {
                (exponents[a] - target)
                    .norm()
                    .total_cmp(&(exponents[b] - target).norm())
            })
            .filter(|&j| (exponents[j] - target).norm() <= 1e-6 * target.norm().max(1.0));
        match partner {
            Some(j) => {
                paired[j] = true;
                let mean = (exponents[i] + exponents[j].conj()) / 2.0;
                exponents[i] = mean;
                exponents[j] = mean.conj();
            }
            None => missing.push(target),
        }
    }
    if !missing.is_empty() {
        if exponents.len() + missing.len() > capacity {
            return Err(Error::ConjugateClosure(format!(
                "{} exponent(s) lack a conjugate partner, e.g. {}",
                missing.len(),
                missing[0].conj()
            )));
        }
        exponents.extend(missing);
    }
    Ok(exponents)
}

/// Whether every value's conjugate is present (within `tol`) as a distinct member.
pub fn is_conjugate_closed(values: &[Complex], tol: f64) -> bool {
    is_closed_under(values, tol, |z| z.conj())
}

/// Whether every value's negation is present (within `tol`) as a distinct member.
pub fn is_negation_closed(values: &[Complex], tol: f64) -> bool {
    is_closed_under(values, tol, |z| -z)
}

fn is_closed_under(values: &[Complex], tol: f64, map: impl Fn(Complex) -> Complex) -> bool {
    let mut used = vec![false; values.len()];
    // Self-mapped values (real for conjugation, zero for negation) pair with themselves.
    for (i, &v) in values.iter().enumerate() {
        if used[i] {
            continue;
        }
        let image = map(v);
        if (image - v).norm() <= tol {
            used[i] = true;
            continue;
        }
        let partner =
            (0..values.len()).find(|&j| !used[j] && j != i && (values[j] - image).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Fits an exact interpolant and enforces [`DEFAULT_INTERPOLATION_TOL`].
pub fn fit(nodes: &[Point2], spec: &ExponentSpec) -> Result<ExpModel> {
    fit_with_tolerance(nodes, spec, DEFAULT_INTERPOLATION_TOL)
}

pub fn fit_with_tolerance(nodes: &[Point2], spec: &ExponentSpec, tol: f64) -> Result<ExpModel> {
    let exponents = match spec {
        ExponentSpec::Given(exponents) => exponents.clone(),
        &ExponentSpec::Estimate {
            m,
            symmetrize,
            resample_count,
        } => estimate_exponents(nodes, m, symmetrize, resample_count)?,
    };
    let model = solve_coefficients(nodes, &exponents)?;
    model.check_residual(tol)?;
    Ok(model)
}
