// SPDX-License-Identifier: Apache-2.0

//! Open-uniform B-spline curves: evaluation by de Boor recursion, derivative
//! splines, Boehm knot insertion and the adaptive least-squares fit used to
//! reconstruct local boundary geometry.

use crate::numerics::{self, DenseMatrix};
use crate::point::Vec2;

use super::GeometryError;

pub const DEFAULT_DEGREE: usize = 3;
pub const MAX_REFINEMENT_ROUNDS: usize = 12;
const MIN_TANGENT_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec2>,
}

impl BSplineCurve {
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Vec2>) -> Result<Self, GeometryError> {
        if control_points.len() < degree + 1 {
            return Err(GeometryError::InvalidSpline(format!(
                "{} control points for degree {degree}",
                control_points.len()
            )));
        }
        if knots.len() != control_points.len() + degree + 1 {
            return Err(GeometryError::InvalidSpline(format!(
                "{} knots for {} control points of degree {degree}",
                knots.len(),
                control_points.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(GeometryError::InvalidSpline("knots must be non-decreasing".into()));
        }
        Ok(Self {
            degree,
            knots,
            control_points,
        })
    }

    /// Open-uniform knot vector on `[0, 1]` with `n_ctrl` control points.
    pub fn open_uniform_knots(degree: usize, n_ctrl: usize) -> Vec<f64> {
        let interior = n_ctrl - degree - 1;
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.control_points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.control_points.len()])
    }

    /// Index `k` with `t_k ≤ u < t_{k+1}`, clamped to the last non-empty span.
    fn find_span(&self, u: f64) -> usize {
        let n = self.control_points.len() - 1;
        let p = self.degree;
        if u >= self.knots[n + 1] {
            return (p..=n).rev().find(|&k| self.knots[k] < self.knots[k + 1]).unwrap_or(n);
        }
        let mut lo = p;
        let mut hi = n + 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    fn check_parameter(&self, u: f64) -> Result<(), GeometryError> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(u >= lo - slack && u <= hi + slack) {
            return Err(GeometryError::ParameterOutOfRange { u, lo, hi });
        }
        Ok(())
    }

    fn de_boor(&self, u: f64) -> Vec2 {
        let p = self.degree;
        let k = self.find_span(u);
        let t = &self.knots;
        let mut d: Vec<Vec2> = (0..=p).map(|j| self.control_points[j + k - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let lo = t[j + k - p];
                let denom = t[j + 1 + k - r] - lo;
                let alpha = if denom > 0.0 { (u - lo) / denom } else { 0.0 };
                d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
            }
        }
        d[p]
    }

    pub fn point(&self, u: f64) -> Result<Vec2, GeometryError> {
        self.check_parameter(u)?;
        Ok(self.de_boor(u))
    }

    /// Hodograph: the degree `p − 1` spline of `f′`.
    pub fn derivative(&self) -> BSplineCurve {
        let p = self.degree;
        if p == 0 {
            return BSplineCurve {
                degree: 0,
                knots: self.knots.clone(),
                control_points: vec![Vec2::ZERO; self.control_points.len()],
            };
        }
        let t = &self.knots;
        let control_points = self
            .control_points
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let denom = t[i + p + 1] - t[i + 1];
                if denom > 0.0 {
                    (w[1] - w[0]) * (p as f64 / denom)
                } else {
                    Vec2::ZERO
                }
            })
            .collect();
        BSplineCurve {
            degree: p - 1,
            knots: t[1..t.len() - 1].to_vec(),
            control_points,
        }
    }

    /// `(f(u), f′(u), f″(u))`.
    pub fn derivatives(&self, u: f64) -> Result<(Vec2, Vec2, Vec2), GeometryError> {
        self.check_parameter(u)?;
        let d1 = self.derivative();
        let d2 = d1.derivative();
        Ok((self.de_boor(u), d1.de_boor(u), d2.de_boor(u)))
    }

    /// Boehm insertion of a single knot; the curve is unchanged.
    pub fn insert_knot(&self, u: f64) -> Result<BSplineCurve, GeometryError> {
        self.check_parameter(u)?;
        let p = self.degree;
        let k = self.find_span(u);
        let t = &self.knots;
        let old = &self.control_points;
        let mut control_points = Vec::with_capacity(old.len() + 1);
        for i in 0..=old.len() {
            let q = if i + p <= k {
                old[i]
            } else if i > k {
                old[i - 1]
            } else {
                let denom = t[i + p] - t[i];
                let a = if denom > 0.0 { (u - t[i]) / denom } else { 0.0 };
                old[i - 1] * (1.0 - a) + old[i] * a
            };
            control_points.push(q);
        }
        let mut knots = t.clone();
        knots.insert(k + 1, u);
        Ok(BSplineCurve {
            degree: p,
            knots,
            control_points,
        })
    }

    /// Values of all `n_ctrl` basis functions at `u`.
    fn basis_row(&self, u: f64) -> Vec<f64> {
        let p = self.degree;
        let t = &self.knots;
        let k = self.find_span(u);
        // Cox–de Boor triangle for the p + 1 non-zero functions.
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = u - t[k + 1 - j];
            right[j] = t[k + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { values[r] / denom } else { 0.0 };
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        let mut row = vec![0.0; self.control_points.len()];
        for (j, v) in values.into_iter().enumerate() {
            row[k - p + j] = v;
        }
        row
    }
}

/// Signed curvature `(x′y″ − y′x″)/|f′|³` in the spline's own traversal sense.
pub fn signed_curvature(spline: &BSplineCurve, u: f64) -> Result<f64, GeometryError> {
    let (_, d1, d2) = spline.derivatives(u)?;
    let speed = d1.norm();
    if speed <= MIN_TANGENT_NORM {
        return Err(GeometryError::DegenerateTangent { u });
    }
    Ok(d1.cross(d2) / speed.powi(3))
}

/// Outward unit normal and curvature at `u`.
///
/// `counterclockwise` states the traversal sense of the spline relative to
/// the enclosed region. The curvature is reported positive on convex parts
/// whichever way the spline is traversed.
pub fn normal_and_curvature(
    spline: &BSplineCurve,
    u: f64,
    counterclockwise: bool,
) -> Result<(Vec2, f64), GeometryError> {
    let (_, d1, d2) = spline.derivatives(u)?;
    let speed = d1.norm();
    if speed <= MIN_TANGENT_NORM {
        return Err(GeometryError::DegenerateTangent { u });
    }
    let tangent = d1 * (1.0 / speed);
    let kappa = d1.cross(d2) / speed.powi(3);
    if counterclockwise {
        Ok((tangent.rot_cw(), kappa))
    } else {
        Ok((tangent.rot_ccw(), -kappa))
    }
}

/// Normalized cumulative chord-length parameters in `[0, 1]`.
pub fn chord_length_parameters(points: &[Vec2]) -> Vec<f64> {
    let mut params = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    params.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        params.push(acc);
    }
    if acc > 0.0 {
        for p in &mut params {
            *p /= acc;
        }
    }
    params
}

/// Interpolation knots: interior knot `j` is the mean of `params[j+1..=j+degree]`.
fn averaged_knots(params: &[f64], degree: usize) -> Vec<f64> {
    let m = params.len();
    let mut knots = vec![params[0]; degree + 1];
    knots.extend((1..m - degree).map(|j| params[j..j + degree].iter().sum::<f64>() / degree as f64));
    knots.extend(std::iter::repeat_n(params[m - 1], degree + 1));
    knots
}

/// Result of [`fit_bspline`].
#[derive(Debug, Clone)]
pub struct SplineFit {
    pub spline: BSplineCurve,
    /// Chord-length parameter of each input point.
    pub params: Vec<f64>,
    /// `max_j ‖f(u_j) − P_j‖` of the returned spline.
    pub deviation: f64,
    pub rounds: usize,
}

fn least_squares_fit(
    degree: usize,
    knots: Vec<f64>,
    points: &[Vec2],
    params: &[f64],
) -> Result<(BSplineCurve, f64), GeometryError> {
    let n_ctrl = knots.len() - degree - 1;
    let mut shell = BSplineCurve::new(degree, knots, vec![Vec2::ZERO; n_ctrl])?;
    let rows: Vec<Vec<f64>> = params.iter().map(|&u| shell.basis_row(u)).collect();
    let basis = DenseMatrix::from_rows(&rows)?;
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let (cx, cy) = match numerics::least_squares_full_rank(&basis, &[&xs, &ys]) {
        Some(mut c) => {
            let cy = c.pop().unwrap_or_default();
            (c.pop().unwrap_or_default(), cy)
        }
        None => {
            let factors = numerics::svd(&basis)?;
            (factors.solve_least_squares(&xs)?, factors.solve_least_squares(&ys)?)
        }
    };
    shell.control_points = cx.into_iter().zip(cy).map(|(x, y)| Vec2::new(x, y)).collect();
    let deviation = max_deviation(&shell, points, params);
    Ok((shell, deviation))
}

fn max_deviation(spline: &BSplineCurve, points: &[Vec2], params: &[f64]) -> f64 {
    points
        .iter()
        .zip(params)
        .map(|(p, &u)| spline.de_boor(u).distance(*p))
        .fold(0.0, f64::max)
}

/// Fits a cubic open-uniform B-spline to `points` at their chord-length
/// parameters, inserting one knot per round in the span holding the point
/// of maximum deviation until the deviation is within `eps_tol`.
pub fn fit_bspline(points: &[Vec2], eps_tol: f64) -> Result<SplineFit, GeometryError> {
    fit_bspline_with_degree(points, eps_tol, DEFAULT_DEGREE)
}

pub fn fit_bspline_with_degree(points: &[Vec2], eps_tol: f64, degree: usize) -> Result<SplineFit, GeometryError> {
    if points.len() < degree + 2 {
        return Err(GeometryError::TooFewPoints {
            needed: degree + 2,
            got: points.len(),
        });
    }
    if !(eps_tol > 0.0) {
        return Err(GeometryError::InvalidTolerance(eps_tol));
    }
    let params = chord_length_parameters(points);
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::CoincidentNodes { index: 0 });
    }

    let mut knots = BSplineCurve::open_uniform_knots(degree, degree + 1);
    let (mut spline, mut deviation) = least_squares_fit(degree, knots.clone(), points, &params)?;
    let mut rounds = 0;
    while deviation > eps_tol && rounds < MAX_REFINEMENT_ROUNDS && spline.control_points.len() < points.len() {
        let worst = points
            .iter()
            .zip(&params)
            .map(|(p, &u)| (u, spline.de_boor(u).distance(*p)))
            .fold((0.0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let span = spline.find_span(worst);
        let new_knot = 0.5 * (knots[span] + knots[span + 1]);
        knots = spline.insert_knot(new_knot)?.knots;
        if knots.len() - degree - 1 == points.len() {
            // full refinement interpolates: use the averaged knot vector
            knots = averaged_knots(&params, degree);
        }
        (spline, deviation) = least_squares_fit(degree, knots.clone(), points, &params)?;
        rounds += 1;
    }
    if deviation > 10.0 * eps_tol {
        return Err(GeometryError::ToleranceNotReached { deviation, eps_tol });
    }
    Ok(SplineFit {
        spline,
        params,
        deviation,
        rounds,
    })
}
