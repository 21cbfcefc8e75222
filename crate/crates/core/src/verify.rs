//! Experiment harness: scaling fits and consistency checks that turn the
//! asymptotic estimates into measurable exponents — DtN-parametrix accuracy,
//! the a priori boundary estimate, composition-remainder scaling, and
//! region/spectrum consistency.
//!
//! Every sweep here is reproducible bit-for-bit for a fixed configuration:
//! mode sets, seeds and traversal orders are fixed, and parallel points are
//! merged in index order.

use crate::parametrix::{q_symbol, rho, BoundarySymbolContext};
use crate::profiles::{CaseTag, RadialProfile};
use crate::psido::{composition_remainder, PsidoError, SymbolGrid};
use crate::radial::{
    dtn_eigenvalue, inhomogeneous_mode_solve, integrate_mode, ModeProblem, SolveError,
};
use crate::regions::radial_free_region;
use crate::rootfind::{Root, SearchBox};
use crate::spectral::{spectral_point, sqrt_upper};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("log-log fit needs at least 4 strictly positive points, got {0}")]
    TooFewPoints(usize),
    #[error("log-log fit requires strictly positive data")]
    NonPositiveData,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Psido(#[from] PsidoError),
    #[error("every sweep point failed")]
    Empty,
}

/// Slope and goodness of a least-squares line through (log x, log y).
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub r2: f64,
}

pub fn fit_slope(points: &[(f64, f64)]) -> Result<FitResult, VerifyError> {
    if points.len() < 4 {
        return Err(VerifyError::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(VerifyError::NonPositiveData);
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let ss_tot = syy - sy * sy / n;
    let intercept = (sy - slope * sx) / n;
    let mut ss_res = 0.0;
    for &(x, y) in points {
        let e = y.ln() - (slope * x.ln() + intercept);
        ss_res += e * e;
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(FitResult { slope, r2 })
}

/// One sampled sweep point.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub h: f64,
    pub theta: f64,
    pub value: f64,
}

/// A scaling sweep with its log-log fit. `skipped` lists points dropped at
/// evaluation time (e.g. a DtN pole), with the reason.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fitted_slope: f64,
    pub fit_r2: f64,
    pub skipped: Vec<(f64, String)>,
}

impl SweepResult {
    fn from_points(points: Vec<SweepPoint>, skipped: Vec<(f64, String)>) -> Result<Self, VerifyError> {
        let fit_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.h, p.value)).collect();
        let fit = fit_slope(&fit_pts)?;
        Ok(Self {
            points,
            fitted_slope: fit.slope,
            fit_r2: fit.r2,
            skipped,
        })
    }

    /// Geometric mean of value/h over the sweep; the empirical prefactor of
    /// a slope-1 law.
    pub fn prefactor_slope_one(&self) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .map(|p| (p.value / p.h).ln())
            .sum::<f64>()
            / self.points.len() as f64;
        s.exp()
    }

    /// CSV rendering with header `h,theta,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,theta,value\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{}\n", p.h, p.theta, p.value));
        }
        s
    }
}

/// How z is chosen per sweep point.
#[derive(Debug, Clone, Copy)]
pub enum ZRule {
    Fixed(Complex64),
    /// θ = h^{2/5} on the Re z ≥ 0 quarter: the hardest admissible regime of
    /// the DtN approximation theorem.
    ThetaCoupled,
}

impl ZRule {
    fn z(&self, h: f64) -> Complex64 {
        match self {
            ZRule::Fixed(z) => *z,
            ZRule::ThetaCoupled => {
                let theta = h.powf(0.4);
                Complex64::new((1.0 - theta * theta).max(0.0).sqrt(), theta)
            }
        }
    }
}

/// Per-mode DtN-parametrix error |ν_ℓ − (ρ + [with_q] h·q)(hℓ)| at a fixed
/// boundary frequency, swept over h. The mode is ℓ = round(ξ/h), so dyadic h
/// with integer ξ samples the symbol at exactly ξ.
#[allow(clippy::too_many_arguments)]
pub fn dtn_parametrix_sweep(
    c: &RadialProfile,
    n: &RadialProfile,
    d: u32,
    z_rule: ZRule,
    h_list: &[f64],
    xi_fixed: f64,
    with_q: bool,
    ode_tol: f64,
) -> Result<SweepResult, VerifyError> {
    let ntilde0 = n.boundary_value() / c.boundary_value();
    let evals: Vec<Result<SweepPoint, (f64, String)>> = h_list
        .par_iter()
        .map(|&h| {
            let z = z_rule.z(h);
            let lambda = sqrt_upper(z) / h;
            let ell = (xi_fixed / h).round().max(0.0) as u32;
            let xi = h * ell as f64;
            let p = ModeProblem { c, n, d, ell, lambda };
            let trace = integrate_mode(&p, ode_tol).map_err(|e| (h, e.to_string()))?;
            let nu = dtn_eigenvalue(&trace, h).map_err(|e| (h, e.to_string()))?;
            let mut symbol = rho(xi, &BoundarySymbolContext { z, ntilde0 });
            if with_q && xi != 0.0 {
                symbol += q_symbol(xi).map_err(|e| (h, e.to_string()))? * h;
            }
            let theta = spectral_point(lambda).map(|sp| sp.theta).unwrap_or(f64::NAN);
            Ok(SweepPoint {
                h,
                theta,
                value: (nu - symbol).norm(),
            })
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for e in evals {
        match e {
            Ok(p) => points.push(p),
            Err(s) => skipped.push(s),
        }
    }
    if points.is_empty() {
        return Err(VerifyError::Empty);
    }
    SweepResult::from_points(points, skipped)
}

/// The two mode-weighted error aggregates of the parametrix comparison at
/// one h: modes ℓ = round(ξ/h) over a fixed elliptic frequency window, test
/// vector f̂_ℓ = ⟨hℓ⟩^{−1}, error content ε_ℓ = |ν_ℓ − (ρ + [q])(hℓ)|, and
///
/// ```text
/// agg(k) = ( Σ_ℓ ⟨hℓ⟩^{2k} ε_ℓ² |f̂_ℓ|² )^{1/2},   k = ±1.
/// ```
///
/// The k = −1 weighting is dominated by the k = +1 weighting term by term.
#[derive(Debug, Clone)]
pub struct DtnAggregateRow {
    pub h: f64,
    pub agg_h1: f64,
    pub agg_hm1: f64,
}

#[derive(Debug, Clone)]
pub struct DtnAggregates {
    pub rows: Vec<DtnAggregateRow>,
    pub slope_h1: f64,
    pub slope_hm1: f64,
}

pub fn dtn_aggregate_sweep(
    c: &RadialProfile,
    n: &RadialProfile,
    d: u32,
    z: Complex64,
    h_list: &[f64],
    xi_window: (f64, f64),
    xi_count: usize,
    with_q: bool,
    ode_tol: f64,
) -> Result<DtnAggregates, VerifyError> {
    let ntilde0 = n.boundary_value() / c.boundary_value();
    let rows: Vec<Result<DtnAggregateRow, VerifyError>> = h_list
        .par_iter()
        .map(|&h| {
            let lambda = sqrt_upper(z) / h;
            let mut s_plus = 0.0;
            let mut s_minus = 0.0;
            for i in 0..xi_count {
                let xi_target =
                    xi_window.0 + (xi_window.1 - xi_window.0) * i as f64 / (xi_count - 1) as f64;
                let ell = (xi_target / h).round() as u32;
                let xi = h * ell as f64;
                let p = ModeProblem { c, n, d, ell, lambda };
                let trace = integrate_mode(&p, ode_tol)?;
                let nu = dtn_eigenvalue(&trace, h)?;
                let mut symbol = rho(xi, &BoundarySymbolContext { z, ntilde0 });
                if with_q && xi != 0.0 {
                    symbol += q_symbol(xi).expect("xi > 0") * h;
                }
                let eps = (nu - symbol).norm();
                let w = 1.0 + xi * xi; // ⟨ξ⟩²
                let fhat2 = 1.0 / w; // |f̂_ℓ|² = ⟨ξ⟩^{−2}
                s_plus += w * eps * eps * fhat2;
                s_minus += eps * eps * fhat2 / w;
            }
            Ok(DtnAggregateRow {
                h,
                agg_h1: s_plus.sqrt(),
                agg_hm1: s_minus.sqrt(),
            })
        })
        .collect();
    let rows: Result<Vec<_>, _> = rows.into_iter().collect();
    let rows = rows?;
    let slope_h1 = fit_slope(&rows.iter().map(|r| (r.h, r.agg_h1)).collect::<Vec<_>>())?.slope;
    let slope_hm1 = fit_slope(&rows.iter().map(|r| (r.h, r.agg_hm1)).collect::<Vec<_>>())?.slope;
    Ok(DtnAggregates {
        rows,
        slope_h1,
        slope_hm1,
    })
}

/// Boundedness sweep of the a priori estimate: the ratio
/// ‖g‖ / (h^{1/2} θ^{−1/2} ‖v‖) aggregated over a fixed set of modes,
/// tabulated per h.
#[derive(Debug, Clone)]
pub struct AprioriResult {
    pub sweep: SweepResult,
    pub max_ratio: f64,
    /// max ratio over min ratio across the sweep.
    pub variation: f64,
}

pub fn apriori_sweep(
    c: &RadialProfile,
    n: &RadialProfile,
    d: u32,
    z: Complex64,
    rhs: &(dyn Fn(f64) -> Complex64 + Sync),
    h_list: &[f64],
    ells: &[u32],
    ode_tol: f64,
) -> Result<AprioriResult, VerifyError> {
    let theta = {
        // z ∈ Z⁺: θ = |Im z|; z ∈ Z⁻: θ = 1
        if z.re >= 0.0 {
            z.im.abs()
        } else {
            1.0
        }
    };
    let evals: Vec<Result<SweepPoint, (f64, String)>> = h_list
        .par_iter()
        .map(|&h| {
            let lambda = sqrt_upper(z) / h;
            let mut g2 = 0.0;
            let mut v2 = 0.0;
            for &ell in ells {
                let p = ModeProblem { c, n, d, ell, lambda };
                let sol = inhomogeneous_mode_solve(&p, &rhs, ode_tol)
                    .map_err(|e| (h, e.to_string()))?;
                g2 += sol.g.norm_sqr();
                v2 += sol.v_norm * sol.v_norm;
            }
            if v2 == 0.0 {
                return Ok(SweepPoint { h, theta, value: 0.0 });
            }
            let ratio = g2.sqrt() / (h.sqrt() * theta.powf(-0.5) * v2.sqrt());
            Ok(SweepPoint { h, theta, value: ratio })
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for e in evals {
        match e {
            Ok(p) => points.push(p),
            Err(s) => skipped.push(s),
        }
    }
    if points.is_empty() {
        return Err(VerifyError::Empty);
    }
    let max_ratio = points.iter().map(|p| p.value).fold(0.0, f64::max);
    let min_ratio = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    // the fit needs 4 positive points; short sweeps and rhs ≡ 0 report NaN
    let (fitted_slope, fit_r2) = if min_ratio > 0.0 && points.len() >= 4 {
        let fit = fit_slope(&points.iter().map(|p| (p.h, p.value)).collect::<Vec<_>>())?;
        (fit.slope, fit.r2)
    } else {
        (f64::NAN, f64::NAN)
    };
    let variation = if min_ratio > 0.0 { max_ratio / min_ratio } else { 1.0 };
    Ok(AprioriResult {
        sweep: SweepResult {
            points,
            fitted_slope,
            fit_r2,
            skipped,
        },
        max_ratio,
        variation,
    })
}

/// Fixed symbol families for the composition experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolFamily {
    /// Smooth in x and ξ on both factors: remainder of order h.
    SmoothPair,
    /// Two Fourier multipliers: diagonal operators, remainder exactly zero.
    MultiplierPair,
    /// First factor C² (not C³) in x, second smooth.
    RoughSmoothPair,
}

/// Smooth compactly supported bump, = 1 at 0, support (−w, w).
fn xi_bump(xi: f64, w: f64) -> f64 {
    let s = xi / w;
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// |sin x|³ is C² with a jump in the third derivative at 0 and π.
fn rough_c2(x: f64) -> f64 {
    let s = x.sin().abs();
    s * s * s
}

fn family_symbols(
    family: SymbolFamily,
    n_x: usize,
    h: f64,
    k_max: usize,
) -> Result<(SymbolGrid, SymbolGrid), PsidoError> {
    match family {
        SymbolFamily::SmoothPair => {
            let a1 = SymbolGrid::sample(n_x, h, k_max, |x, xi| {
                Complex64::new((2.0 + x.cos()) * xi_bump(xi, 0.45), 0.0)
            })?;
            let a2 = SymbolGrid::sample(n_x, h, k_max, |x, xi| {
                Complex64::new((2.0 + x.sin()) * xi_bump(xi, 0.4), 0.0)
            })?;
            Ok((a1, a2))
        }
        SymbolFamily::MultiplierPair => {
            let a1 = SymbolGrid::sample(n_x, h, k_max, |_, xi| {
                Complex64::new(xi_bump(xi, 0.45), 0.2 * xi)
            })?;
            let a2 = SymbolGrid::sample(n_x, h, k_max, |_, xi| {
                Complex64::new(1.0 / (1.0 + xi * xi), 0.0)
            })?;
            Ok((a1, a2))
        }
        SymbolFamily::RoughSmoothPair => {
            let a1 = SymbolGrid::sample(n_x, h, k_max, |x, xi| {
                Complex64::new((1.0 + rough_c2(x)) * xi_bump(xi, 0.45), 0.0)
            })?;
            let a2 = SymbolGrid::sample(n_x, h, k_max, |x, xi| {
                Complex64::new((2.0 + x.sin()) * xi_bump(xi, 0.4), 0.0)
            })?;
            Ok((a1, a2))
        }
    }
}

/// Composition sweep result. For the multiplier family the remainder sits at
/// round-off; the fit is skipped and `exact` is set.
#[derive(Debug, Clone)]
pub struct CompositionSweep {
    pub family: SymbolFamily,
    pub points: Vec<(f64, f64)>,
    pub fitted_slope: Option<f64>,
    pub fit_r2: Option<f64>,
    pub exact: bool,
}

impl CompositionSweep {
    /// CSV rendering with header `h,remainder_norm,fitted_slope`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,remainder_norm,fitted_slope\n");
        let slope = self.fitted_slope.unwrap_or(f64::NAN);
        for (h, r) in &self.points {
            s.push_str(&format!("{},{},{}\n", h, r, slope));
        }
        s
    }
}

/// Grid scale per h used by the composition sweeps: modes out to |ξ| = 0.5,
/// x-resolution the next power of two.
fn sweep_grid(h: f64) -> (usize, usize) {
    let k_max = (0.5 / h).round() as usize;
    let n_x = (2 * k_max + 1).next_power_of_two();
    (n_x, k_max)
}

pub fn composition_sweep(
    family: SymbolFamily,
    h_list: &[f64],
    k: f64,
) -> Result<CompositionSweep, VerifyError> {
    let points: Vec<Result<(f64, f64), VerifyError>> = h_list
        .par_iter()
        .map(|&h| {
            let (n_x, k_max) = sweep_grid(h);
            let (a1, a2) = family_symbols(family, n_x, h, k_max)?;
            Ok((h, composition_remainder(&a1, &a2, k)?))
        })
        .collect();
    let points: Result<Vec<_>, _> = points.into_iter().collect();
    let points = points?;
    let exact = points.iter().all(|&(_, r)| r <= 1e-12);
    let (fitted_slope, fit_r2) = if exact {
        (None, None)
    } else {
        let fit = fit_slope(&points)?;
        (Some(fit.slope), Some(fit.r2))
    };
    Ok(CompositionSweep {
        family,
        points,
        fitted_slope,
        fit_r2,
        exact,
    })
}

/// A spectrum/region consistency report.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    /// Roots violating the free region at the reported C.
    pub violations: Vec<(Root, f64)>,
    /// Smallest grid C with an empty violation list, if any.
    pub calibrated_c: Option<f64>,
    /// True when the spectrum was empty (calibration is vacuous).
    pub vacuous: bool,
    pub case: CaseTag,
}

/// Calibrate the smallest admissible region constant against a computed
/// spectrum: scan C over {2.1, 2.2, …, 20.0} and pick the first value whose
/// free region (clipped to the search box) contains no root. When `user_c`
/// is given, the violation list is reported for that C instead.
pub fn region_consistency(
    spectrum: &[Root],
    case: CaseTag,
    search_box: &SearchBox,
    epsilon: f64,
    user_c: Option<f64>,
) -> ConsistencyReport {
    let _ = search_box; // roots come from this box already; kept for the record
    let violations_at = |c: f64| -> Vec<(Root, f64)> {
        spectrum
            .iter()
            .filter(|r| radial_free_region(r.lambda, case, c, epsilon))
            .map(|r| (r.clone(), c))
            .collect()
    };
    if spectrum.is_empty() {
        return ConsistencyReport {
            violations: Vec::new(),
            calibrated_c: user_c.or(Some(2.1)),
            vacuous: true,
            case,
        };
    }
    let mut calibrated = None;
    for i in 0..=179 {
        let c = 2.1 + 0.1 * i as f64;
        if violations_at(c).is_empty() {
            calibrated = Some(c);
            break;
        }
    }
    let report_c = user_c.or(calibrated);
    let violations = report_c.map(|c| violations_at(c)).unwrap_or_default();
    ConsistencyReport {
        violations,
        calibrated_c: calibrated,
        vacuous: false,
        case,
    }
}
