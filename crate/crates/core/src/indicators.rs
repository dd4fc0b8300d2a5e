// SPDX-License-Identifier: Apache-2.0

//! A-posteriori error indicators for the MFS extension: leave-one-out
//! residuals (hat matrix, Rippa, pseudoinverse Rippa) and the maximum
//! principle boundary indicator.

use thiserror::Error;

use crate::exec;
use crate::geometry::{local_splines, BoundaryCurve, GeometryError, LocalSpline, ReconstructionParams};
use crate::mfs::{CollocationProblem, MfsError, MfsField, SolveMode};
use crate::numerics::{self, DenseMatrix, LuFactors, NumericsError, SvdFactors};
use crate::point::Vec2;

/// Rows with `1 − H_jj` below this get an infinite residual.
pub const HAT_SENTINEL_TOL: f64 = 1e-12;

/// Inverse diagonals smaller than this in magnitude give an infinite residual.
pub const ZERO_DIAGONAL_TOL: f64 = 1e-300;

/// Reference maxima below this are treated as degenerate.
pub const DEGENERATE_REFERENCE_TOL: f64 = 1e-14;

/// Largest system the brute-force oracle accepts.
pub const BRUTEFORCE_MAX_ROWS: usize = 256;

/// Per-component residual vectors `e_j^(k)`.
pub type Residuals = [Vec<f64>; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("Rippa's formula needs a square system, got {0} mode")]
    NotSquare(SolveMode),
    #[error("brute-force LOO limited to {BRUTEFORCE_MAX_ROWS} rows, got {0}")]
    TooLarge(usize),
    #[error("field does not match the problem: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Mfs(#[from] MfsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `max_k max_j |e_j^(k)|`; infinite if any entry is a sentinel.
pub fn aggregate_inf(residuals: &Residuals) -> f64 {
    residuals
        .iter()
        .flatten()
        .map(|e| if e.is_nan() { f64::INFINITY } else { e.abs() })
        .fold(0.0, f64::max)
}

fn check_field(problem: &CollocationProblem, field: &MfsField) -> Result<(), IndicatorError> {
    if field.coefficients(0).len() != problem.n_sources() {
        return Err(IndicatorError::Inconsistent(format!(
            "{} coefficients for {} sources",
            field.coefficients(0).len(),
            problem.n_sources()
        )));
    }
    Ok(())
}

/// Hat-matrix LOOCV `e_j = (g_j − ĝ_j)/(1 − H_jj)` over the true collocation rows.
pub fn loocv_hat(problem: &CollocationProblem, field: &MfsField) -> Result<Residuals, IndicatorError> {
    let svd = numerics::svd(problem.matrix())?;
    loocv_hat_with(problem, field, &svd)
}

/// As [`loocv_hat`] with a precomputed SVD of the system matrix.
pub fn loocv_hat_with(
    problem: &CollocationProblem,
    field: &MfsField,
    svd: &SvdFactors,
) -> Result<Residuals, IndicatorError> {
    check_field(problem, field)?;
    let hat = svd.hat_diagonal();
    let n_c = problem.n_collocation();
    let component = |k: usize| -> Result<Vec<f64>, IndicatorError> {
        let fitted = problem.matrix().matvec(field.coefficients(k))?;
        let g = problem.rhs(k);
        Ok((0..n_c)
            .map(|j| {
                let denom = 1.0 - hat[j];
                if denom < HAT_SENTINEL_TOL {
                    f64::INFINITY
                } else {
                    (g[j] - fitted[j]) / denom
                }
            })
            .collect())
    };
    Ok([component(0)?, component(1)?])
}

/// Rippa's shortcut `e_j = α_j / [A⁻¹]_jj` for square systems.
pub fn loocv_rippa(problem: &CollocationProblem, field: &MfsField) -> Result<Residuals, IndicatorError> {
    if problem.mode() != SolveMode::Square || !problem.matrix().is_square() {
        return Err(IndicatorError::NotSquare(problem.mode()));
    }
    check_field(problem, field)?;
    let lu = LuFactors::new(problem.matrix(), numerics::PIVOT_RTOL)?;
    Ok(divide_by_diagonal(field, &lu.inverse_diagonal()))
}

/// Heuristic `ẽ_j = α_j / [A⁺]_jj` for `j < min(N_s, N_c_eff)`.
pub fn pinv_rippa(problem: &CollocationProblem, field: &MfsField) -> Result<Residuals, IndicatorError> {
    let svd = numerics::svd(problem.matrix())?;
    pinv_rippa_with(problem, field, &svd)
}

/// As [`pinv_rippa`] with a precomputed SVD of the system matrix.
pub fn pinv_rippa_with(
    problem: &CollocationProblem,
    field: &MfsField,
    svd: &SvdFactors,
) -> Result<Residuals, IndicatorError> {
    check_field(problem, field)?;
    Ok(divide_by_diagonal(field, &pinv_diagonal(svd)))
}

/// `[A⁺]_jj = Σ_l V_jl U_jl / σ_l` over the retained singular values.
fn pinv_diagonal(svd: &SvdFactors) -> Vec<f64> {
    let r = svd.rank();
    let k = svd.u.rows().min(svd.v.rows());
    (0..k)
        .map(|j| (0..r).map(|l| svd.v[(j, l)] * svd.u[(j, l)] / svd.sigma[l]).sum())
        .collect()
}

fn divide_by_diagonal(field: &MfsField, diag: &[f64]) -> Residuals {
    let component = |k: usize| -> Vec<f64> {
        field
            .coefficients(k)
            .iter()
            .zip(diag)
            .map(|(a, d)| {
                if d.abs() < ZERO_DIAGONAL_TOL {
                    f64::INFINITY
                } else {
                    a / d
                }
            })
            .collect()
    };
    [component(0), component(1)]
}

/// Leave-one-out by explicit re-solves, one per true collocation row.
///
/// A square full-rank system drops row `j` together with basis function `j`
/// (the pairing Rippa's formula assumes). Every other system drops row `j`
/// only and refits in the minimum-norm least-squares sense, which is the
/// setting of the hat-matrix formula.
pub fn loocv_bruteforce(problem: &CollocationProblem) -> Result<Residuals, IndicatorError> {
    let a = problem.matrix();
    if a.rows() > BRUTEFORCE_MAX_ROWS {
        return Err(IndicatorError::TooLarge(a.rows()));
    }
    let paired = problem.mode() == SolveMode::Square && a.is_square() && numerics::svd(a)?.rank() == a.cols();
    let per_row = exec::map_range(problem.n_collocation(), |j| {
        if paired {
            leave_out_paired(a, [problem.rhs(0), problem.rhs(1)], j)
        } else {
            leave_out_row(a, [problem.rhs(0), problem.rhs(1)], j)
        }
    });
    let mut out: Residuals = [Vec::with_capacity(per_row.len()), Vec::with_capacity(per_row.len())];
    for r in per_row {
        let [e1, e2] = r?;
        out[0].push(e1);
        out[1].push(e2);
    }
    Ok(out)
}

fn drop_entry(v: &[f64], j: usize) -> Vec<f64> {
    v.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect()
}

fn leave_out_paired(a: &DenseMatrix, g: [&[f64]; 2], j: usize) -> Result<[f64; 2], IndicatorError> {
    if a.rows() == 1 {
        return Ok([g[0][0], g[1][0]]);
    }
    let reduced = a.without_row_col(j, j);
    let lu = LuFactors::new(&reduced, numerics::PIVOT_RTOL)?;
    let row = drop_entry(a.row(j), j);
    let mut e = [0.0; 2];
    for k in 0..2 {
        let beta = lu.solve(&drop_entry(g[k], j))?;
        let pred: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        e[k] = g[k][j] - pred;
    }
    Ok(e)
}

fn leave_out_row(a: &DenseMatrix, g: [&[f64]; 2], j: usize) -> Result<[f64; 2], IndicatorError> {
    if a.rows() == 1 {
        return Ok([g[0][0], g[1][0]]);
    }
    let svd = numerics::svd(&a.without_row(j))?;
    let row = a.row(j);
    let mut e = [0.0; 2];
    for k in 0..2 {
        let beta = svd.solve_least_squares(&drop_entry(g[k], j))?;
        let pred: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        e[k] = g[k][j] - pred;
    }
    Ok(e)
}

/// A boundary test point with the prescribed velocity there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: Vec2,
    pub velocity: Vec2,
}

/// `P` points on the boundary. Segment `i` receives
/// `⌊(i+1)P/N⌋ − ⌊iP/N⌋` points at equal parameter fractions of the local
/// spline of node `i`; fraction 0 is the node itself.
pub fn sample_boundary(
    curve: &BoundaryCurve,
    p: usize,
    params: &ReconstructionParams,
) -> Result<Vec<BoundarySample>, IndicatorError> {
    let splines = local_splines(curve, params)?;
    sample_from_splines(curve, &splines, p)
}

/// As [`sample_boundary`] with the local splines already fitted.
pub fn sample_from_splines(
    curve: &BoundaryCurve,
    splines: &[LocalSpline],
    p: usize,
) -> Result<Vec<BoundarySample>, IndicatorError> {
    let n = curve.len();
    let ccw = curve.is_counterclockwise();
    let per_node = exec::map_range(n, |i| -> Result<Vec<BoundarySample>, GeometryError> {
        let count = (i + 1) * p / n - i * p / n;
        let local = &splines[i];
        (0..count)
            .map(|m| {
                let f = m as f64 / count as f64;
                let u = local.param_toward_next(f);
                let point = if m == 0 { curve.node(i) } else { local.point(u)? };
                let velocity = local.geometry_at(u, ccw)?.velocity;
                Ok(BoundarySample { point, velocity })
            })
            .collect::<Result<Vec<_>, GeometryError>>()
            .map_err(|e| e.at_node(i))
    });
    let mut out = Vec::with_capacity(p);
    for samples in per_node {
        out.extend(samples?);
    }
    Ok(out)
}

/// What the field is compared against on the boundary.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    /// The spline boundary velocity `−κn` at the test points.
    BoundaryData,
    /// A closed-form velocity field.
    Analytic(&'a (dyn Fn(Vec2) -> Vec2 + Sync)),
    /// Another MFS field.
    Field(&'a MfsField),
}

impl std::fmt::Debug for Reference<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reference::BoundaryData => f.write_str("BoundaryData"),
            Reference::Analytic(_) => f.write_str("Analytic"),
            Reference::Field(_) => f.write_str("Field"),
        }
    }
}

/// Value of the maximum principle indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpIndicator {
    pub value: f64,
    /// Set when some component's reference maximum was below
    /// [`DEGENERATE_REFERENCE_TOL`] and the raw error was used.
    pub degenerate_reference: bool,
}

/// `max_k max_p |u^(k)(z_p) − u_true^(k)(z_p)| / max_p |u_true^(k)(z_p)|`.
pub fn max_principle_indicator(
    field: &MfsField,
    curve: &BoundaryCurve,
    p: usize,
    params: &ReconstructionParams,
    reference: Reference<'_>,
) -> Result<MpIndicator, IndicatorError> {
    let samples = sample_boundary(curve, p, params)?;
    max_principle_on_samples(field, &samples, reference)
}

/// As [`max_principle_indicator`] on precomputed boundary samples.
pub fn max_principle_on_samples(
    field: &MfsField,
    samples: &[BoundarySample],
    reference: Reference<'_>,
) -> Result<MpIndicator, IndicatorError> {
    let points: Vec<Vec2> = samples.iter().map(|s| s.point).collect();
    let u = crate::mfs::evaluate_field(field, &points)?;
    let truth: Vec<Vec2> = match reference {
        Reference::BoundaryData => samples.iter().map(|s| s.velocity).collect(),
        Reference::Analytic(f) => exec::map_slice(&points, |&x| f(x)),
        Reference::Field(other) => crate::mfs::evaluate_field(other, &points)?,
    };
    let mut value: f64 = 0.0;
    let mut degenerate_reference = false;
    for k in 0..2 {
        let pick = |v: Vec2| if k == 0 { v.x } else { v.y };
        let err = u
            .iter()
            .zip(&truth)
            .map(|(a, b)| (pick(*a) - pick(*b)).abs())
            .fold(0.0, f64::max);
        let scale = truth.iter().map(|b| pick(*b).abs()).fold(0.0, f64::max);
        let ratio = if scale < DEGENERATE_REFERENCE_TOL {
            degenerate_reference = true;
            err
        } else {
            err / scale
        };
        value = value.max(ratio);
    }
    Ok(MpIndicator {
        value,
        degenerate_reference,
    })
}

/// All indicators for one solved system.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    /// Rippa value for nonsingular square systems, hat-matrix value otherwise.
    pub e_loo_inf: f64,
    pub e_loo_hat_inf: f64,
    pub e_loo_rippa_inf: Option<f64>,
    pub e_pr_inf: f64,
    pub e_mp_inf: f64,
    /// Residuals behind `e_loo_inf`.
    pub loo_residuals: Residuals,
    /// Hat diagonal over the true collocation rows.
    pub hat_diag: Vec<f64>,
    /// `σ_max / σ_min` of the system matrix.
    pub cond: f64,
    pub mode: SolveMode,
    /// pinv-Rippa carries no guarantee outside the square case.
    pub pr_heuristic: bool,
    pub mp_degenerate_reference: bool,
    /// Sub-computations that failed or disagreed.
    pub flags: Vec<String>,
}

/// Computes every indicator from one SVD of the system matrix.
pub fn full_report(
    problem: &CollocationProblem,
    field: &MfsField,
    curve: &BoundaryCurve,
    p: usize,
    params: &ReconstructionParams,
    reference: Reference<'_>,
) -> Result<IndicatorReport, IndicatorError> {
    let mut flags = Vec::new();
    let samples = match sample_boundary(curve, p, params) {
        Ok(s) => Some(s),
        Err(e) => {
            flags.push(format!("max principle: {e}"));
            None
        }
    };
    let mut report = report_from_samples(problem, field, None, samples.as_deref(), reference)?;
    flags.append(&mut report.flags);
    report.flags = flags;
    Ok(report)
}

/// As [`full_report`] with precomputed boundary samples and, optionally, the
/// SVD of the system matrix. Without samples `E_MP∞` is reported as infinite.
pub fn report_from_samples(
    problem: &CollocationProblem,
    field: &MfsField,
    svd: Option<&SvdFactors>,
    samples: Option<&[BoundarySample]>,
    reference: Reference<'_>,
) -> Result<IndicatorReport, IndicatorError> {
    check_field(problem, field)?;
    let mut flags = Vec::new();
    let owned;
    let svd = match svd {
        Some(s) => s,
        None => {
            owned = numerics::svd(problem.matrix())?;
            &owned
        }
    };
    let cond = match (svd.sigma.first(), svd.sigma.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    let hat = loocv_hat_with(problem, field, svd)?;
    let e_loo_hat_inf = aggregate_inf(&hat);
    let rippa = if problem.mode() == SolveMode::Square {
        match loocv_rippa(problem, field) {
            Ok(r) => Some(r),
            Err(e) => {
                flags.push(format!("rippa: {e}"));
                None
            }
        }
    } else {
        None
    };
    let e_loo_rippa_inf = rippa.as_ref().map(aggregate_inf);
    if let (Some(r), true) = (e_loo_rippa_inf, e_loo_hat_inf.is_finite()) {
        if (r - e_loo_hat_inf).abs() > 1e-8 * r.abs().max(e_loo_hat_inf.abs()) {
            flags.push(format!("rippa/hat mismatch: {r:e} vs {e_loo_hat_inf:e}"));
        }
    }
    let pr = pinv_rippa_with(problem, field, svd)?;
    let e_pr_inf = aggregate_inf(&pr);
    let mp = match samples.map(|s| max_principle_on_samples(field, s, reference)) {
        Some(Ok(mp)) => mp,
        other => {
            if let Some(Err(e)) = other {
                flags.push(format!("max principle: {e}"));
            }
            MpIndicator {
                value: f64::INFINITY,
                degenerate_reference: false,
            }
        }
    };
    let (e_loo_inf, loo_residuals) = match rippa {
        Some(r) => (aggregate_inf(&r), r),
        None => (e_loo_hat_inf, hat),
    };
    let mut hat_diag = svd.hat_diagonal();
    hat_diag.truncate(problem.n_collocation());
    Ok(IndicatorReport {
        e_loo_inf,
        e_loo_hat_inf,
        e_loo_rippa_inf,
        e_pr_inf,
        e_mp_inf: mp.value,
        loo_residuals,
        hat_diag,
        cond,
        mode: problem.mode(),
        pr_heuristic: problem.mode() != SolveMode::Square,
        mp_degenerate_reference: mp.degenerate_reference,
        flags,
    })
}

/// Header of the per-solve report CSV.
pub const REPORT_CSV_HEADER: &str = "t,r_s,h,N_c,mode,E_loo_inf,E_pR_inf,E_mp_inf,cond";

/// One report CSV row.
pub fn report_csv_row(t: f64, r_s: f64, h: f64, n_c: usize, report: &IndicatorReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        fmt_real(t),
        fmt_real(r_s),
        fmt_real(h),
        n_c,
        report.mode,
        fmt_real(report.e_loo_inf),
        fmt_real(report.e_pr_inf),
        fmt_real(report.e_mp_inf),
        fmt_real(report.cond)
    )
}

/// Shortest round-trip formatting; infinities and NaN as `inf`, `-inf`, `nan`.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:e}")
    }
}
