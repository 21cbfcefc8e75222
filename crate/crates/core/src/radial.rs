//! Per-angular-mode radial ODE integration: boundary traces, exact per-mode
//! DtN eigenvalues, the interior-transmission characteristic function and the
//! inhomogeneous Dirichlet solve.
//!
//! Separation of the divergence-form equation on the unit ball gives, per
//! spherical-harmonic degree ℓ,
//!
//! ```text
//! v'' + ((d-1)/r + c'/c) v' + (λ² n/c − ℓ(ℓ+d−2)/r²) v = 0,
//! ```
//!
//! with the regular Frobenius behaviour v ~ r^ℓ at the origin. Boundary
//! traces are reported with a real log-scale factor removed so that ratios
//! and characteristic-function zeros are immune to the r^ℓ growth.

use crate::ode::{integrate, OdeError, StepControl};
use crate::profiles::{MediumPair, RadialProfile};
use crate::spectral::ScaledComplex;
use num_complex::Complex64;
use thiserror::Error;

/// One separated radial problem.
#[derive(Debug, Clone, Copy)]
pub struct ModeProblem<'a> {
    pub c: &'a RadialProfile,
    pub n: &'a RadialProfile,
    pub d: u32,
    pub ell: u32,
    pub lambda: Complex64,
}

/// Boundary trace of the regular solution, scaled by e^{log_scale}.
///
/// The true boundary values are `v1·e^{log_scale}` and `dv1·e^{log_scale}`;
/// the ratio `dv1/v1` is scale-free.
#[derive(Debug, Clone, Copy)]
pub struct ModeTrace {
    pub v1: Complex64,
    pub dv1: Complex64,
    pub log_scale: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("spectral parameter must be finite, got {0}")]
    InvalidLambda(Complex64),
    #[error("radial integration failed at r = {radius}: {source}")]
    Integration { radius: f64, source: OdeError },
    #[error("DtN pole: boundary value vanishes (|v1| = {v1_abs:e})")]
    DtnPole { v1_abs: f64 },
    #[error("near-singular Dirichlet solve, condition estimate {cond:e}")]
    NearSingular { cond: f64 },
    #[error("tolerance must be positive")]
    BadTolerance,
}

/// Renormalisation threshold for the (v, v') path.
const RESCALE_ABOVE: f64 = 1e120;
const RESCALE_BELOW: f64 = 1e-120;
/// Mode degree above which the Riccati form of the logarithmic derivative
/// is integrated instead of (v, v').
const RICCATI_ELL: u32 = 40;

fn frobenius_start(p: &ModeProblem) -> (f64, Complex64) {
    // r_start = max(1e-6, ℓ·1e-4), capped below 1 for extreme degrees.
    let r = (p.ell as f64 * 1e-4).max(1e-6).min(0.9);
    let c0 = p.c.values()[0];
    let n0 = p.n.values()[0];
    let lam2 = p.lambda * p.lambda;
    let alpha = -lam2 * n0 / (c0 * (4.0 * p.ell as f64 + 2.0 * p.d as f64));
    (r, alpha)
}

/// Breakpoints of both profiles inside (r_start, 1), plus the endpoint 1.
fn segment_ends(p: &ModeProblem, r_start: f64) -> Vec<f64> {
    let mut ends: Vec<f64> = p
        .c
        .breakpoints()
        .iter()
        .chain(p.n.breakpoints().iter())
        .cloned()
        .filter(|&b| b > r_start && b < 1.0)
        .collect();
    ends.push(1.0);
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ends.dedup();
    ends
}

struct SegmentCoeffs {
    c_slope: f64,
    c_icept: f64,
    n_slope: f64,
    n_icept: f64,
    dm1: f64,
    ell_term: f64,
    lam2: Complex64,
}

impl SegmentCoeffs {
    fn new(p: &ModeProblem, lo: f64, hi: f64) -> Self {
        let (c_slope, c_icept) = p.c.segment_coeffs(lo, hi);
        let (n_slope, n_icept) = p.n.segment_coeffs(lo, hi);
        Self {
            c_slope,
            c_icept,
            n_slope,
            n_icept,
            dm1: (p.d - 1) as f64,
            ell_term: p.ell as f64 * (p.ell as f64 + p.d as f64 - 2.0),
            lam2: p.lambda * p.lambda,
        }
    }

    /// First-order coefficient a(r) = (d−1)/r + c'/c.
    fn a(&self, r: f64) -> f64 {
        let c = self.c_slope * r + self.c_icept;
        self.dm1 / r + self.c_slope / c
    }

    /// Zeroth-order coefficient b(r) = λ² n/c − ℓ(ℓ+d−2)/r².
    fn b(&self, r: f64) -> Complex64 {
        let c = self.c_slope * r + self.c_icept;
        let n = self.n_slope * r + self.n_icept;
        self.lam2 * (n / c) - self.ell_term / (r * r)
    }
}

fn control(tol: f64) -> StepControl {
    StepControl::with_tol(tol, tol * 1e-2)
}

/// Integrate the regular solution out to r = 1 and report its scaled trace.
pub fn integrate_mode(p: &ModeProblem, tol: f64) -> Result<ModeTrace, SolveError> {
    if !(tol > 0.0) {
        return Err(SolveError::BadTolerance);
    }
    if !p.lambda.re.is_finite() || !p.lambda.im.is_finite() {
        return Err(SolveError::InvalidLambda(p.lambda));
    }
    if p.ell > RICCATI_ELL {
        integrate_mode_riccati(p, tol)
    } else {
        integrate_mode_linear(p, tol)
    }
}

fn integrate_mode_linear(p: &ModeProblem, tol: f64) -> Result<ModeTrace, SolveError> {
    let (r_start, alpha) = frobenius_start(p);
    let ell = p.ell as f64;
    let rs2 = r_start * r_start;
    // v = r^ℓ (1 + α r²) with the r^ℓ factor removed into log_scale
    let mut y = [
        Complex64::new(1.0, 0.0) + alpha * rs2,
        (Complex64::new(1.0, 0.0) + alpha * rs2) * (ell / r_start) + alpha * (2.0 * r_start),
    ];
    let mut log_scale = ell * r_start.ln();

    let ctrl = control(tol);
    let mut lo = r_start;
    for hi in segment_ends(p, r_start) {
        let sc = SegmentCoeffs::new(p, lo, hi);
        let f = |r: f64, y: &[Complex64; 2]| [y[1], -y[1] * sc.a(r) - y[0] * sc.b(r)];
        y = integrate(&f, lo, hi, y, &ctrl, |_, y| {
            let m = y[0].norm().max(y[1].norm());
            if m > RESCALE_ABOVE || (m < RESCALE_BELOW && m > 0.0) {
                let s = m.ln();
                let inv = (-s).exp();
                y[0] *= inv;
                y[1] *= inv;
                log_scale += s;
            }
        })
        .map_err(|e| SolveError::Integration {
            radius: failure_radius(&e),
            source: e,
        })?;
        lo = hi;
    }
    Ok(ModeTrace {
        v1: y[0],
        dv1: y[1],
        log_scale,
    })
}

fn integrate_mode_riccati(p: &ModeProblem, tol: f64) -> Result<ModeTrace, SolveError> {
    let (r_start, alpha) = frobenius_start(p);
    let ell = p.ell as f64;
    let rs2 = r_start * r_start;
    let one = Complex64::new(1.0, 0.0);
    // m = v'/v, L = log(v/r^ℓ); the start folds the series factor into L.
    // m0 = ℓ/r + 2αr/(1 + αr²) from v = r^ℓ(1 + αr²).
    let start_factor = one + alpha * rs2;
    let mut y = [
        Complex64::new(ell / r_start, 0.0) + alpha * (2.0 * r_start) / start_factor,
        start_factor.ln(),
    ];

    let ctrl = control(tol);
    let mut lo = r_start;
    for hi in segment_ends(p, r_start) {
        let sc = SegmentCoeffs::new(p, lo, hi);
        // m' = −a m − m² − b + ℓ(ℓ+d−2)... (b already carries the ℓ term);
        // L' = m − ℓ/r keeps L slowly varying by tracking growth beyond r^ℓ.
        let f = |r: f64, y: &[Complex64; 2]| {
            let m = y[0];
            [-m * sc.a(r) - m * m - sc.b(r), m - ell / r]
        };
        y = integrate(&f, lo, hi, y, &ctrl, |_, _| {}).map_err(|e| SolveError::Integration {
            radius: failure_radius(&e),
            source: e,
        })?;
        lo = hi;
    }
    let m1 = y[0];
    let log_v = y[1]; // log(v(1)) − ℓ·log(r_start) − ℓ·(log 1 − log r_start) …
    // v(1) = r_start^ℓ · e^{∫ m} = e^{ℓ ln r_start + L + ℓ (ln 1 − ln r_start)} = e^{L}
    // since L integrates m − ℓ/r starting from ln(1 + α r_s²).
    let log_scale = log_v.re;
    let v1 = Complex64::from_polar(1.0, log_v.im);
    Ok(ModeTrace {
        v1,
        dv1: m1 * v1,
        log_scale,
    })
}

fn failure_radius(e: &OdeError) -> f64 {
    match e {
        OdeError::StepUnderflow { t } | OdeError::NonFinite { t } | OdeError::MaxSteps { t } => *t,
    }
}

/// Per-mode DtN eigenvalue ν_ℓ = i·h·v'(1)/v(1) (inner normal convention).
pub fn dtn_eigenvalue(trace: &ModeTrace, h: f64) -> Result<Complex64, SolveError> {
    let v1_abs = trace.v1.norm();
    if v1_abs == 0.0 || trace.dv1.norm() / v1_abs > 1e14 {
        return Err(SolveError::DtnPole { v1_abs });
    }
    Ok(Complex64::new(0.0, h) * (trace.dv1 / trace.v1))
}

/// Interior-transmission characteristic function of one angular mode:
///
/// ```text
/// W_ℓ(λ) = c₁(1)·v₁'⁽¹⁾·v₁⁽²⁾ − c₂(1)·v₁'⁽²⁾·v₁⁽¹⁾,
/// ```
///
/// assembled from the two Frobenius-normalised traces. Both products carry
/// the same scale factor, so the result is returned as a [`ScaledComplex`]
/// whose zeros (in λ) are exactly the mode-ℓ transmission eigenvalues.
pub fn itp_characteristic(
    lambda: Complex64,
    ell: u32,
    pair: &MediumPair,
    tol: f64,
) -> Result<ScaledComplex, SolveError> {
    let p1 = ModeProblem {
        c: &pair.c1,
        n: &pair.n1,
        d: pair.d,
        ell,
        lambda,
    };
    let p2 = ModeProblem {
        c: &pair.c2,
        n: &pair.n2,
        d: pair.d,
        ell,
        lambda,
    };
    let t1 = integrate_mode(&p1, tol)?;
    let t2 = integrate_mode(&p2, tol)?;
    let c1 = pair.c1.boundary_value();
    let c2 = pair.c2.boundary_value();
    Ok(ScaledComplex::new(
        t1.dv1 * t2.v1 * c1 - t2.dv1 * t1.v1 * c2,
        t1.log_scale + t2.log_scale,
    ))
}

/// Result of the inhomogeneous Dirichlet solve: the scaled normal trace
/// g = h·∂_ν u|_Γ of the mode and the weighted L² norm of its data.
#[derive(Debug, Clone, Copy)]
pub struct InhomogSolution {
    pub g: Complex64,
    pub v_norm: f64,
}

/// Solve the per-mode two-point problem (regular at 0, zero at r = 1) for
/// `(h²∇c∇ + z n)u = h·rhs` with h = 1/|λ|, z = (hλ)², and return
/// g = h·∂_ν u(1) = −h·u'(1).
///
/// Variation of parameters over the regular shooting solution y₁ gives
/// g = −∫₀¹ y₁ s^{d−1} rhs ds / (c(1)·y₁(1)); the quadrature rides along the
/// integration as an extra state component sharing y₁'s renormalisation.
pub fn inhomogeneous_mode_solve(
    p: &ModeProblem,
    rhs: &dyn Fn(f64) -> Complex64,
    tol: f64,
) -> Result<InhomogSolution, SolveError> {
    if !(tol > 0.0) {
        return Err(SolveError::BadTolerance);
    }
    let (r_start, alpha) = frobenius_start(p);
    let ell = p.ell as f64;
    let dm1 = (p.d - 1) as i32;
    let rs2 = r_start * r_start;
    let mut y = [
        Complex64::new(1.0, 0.0) + alpha * rs2,
        (Complex64::new(1.0, 0.0) + alpha * rs2) * (ell / r_start) + alpha * (2.0 * r_start),
        Complex64::new(0.0, 0.0),
    ];
    let mut log_scale = ell * r_start.ln();
    let mut max_log_v = y[0].norm().ln() + log_scale;

    let ctrl = control(tol);
    let mut lo = r_start;
    for hi in segment_ends(p, r_start) {
        let sc = SegmentCoeffs::new(p, lo, hi);
        let f = |r: f64, y: &[Complex64; 3]| {
            [
                y[1],
                -y[1] * sc.a(r) - y[0] * sc.b(r),
                y[0] * rhs(r) * r.powi(dm1),
            ]
        };
        y = integrate(&f, lo, hi, y, &ctrl, |_, y| {
            let m = y[0].norm().max(y[1].norm());
            max_log_v = max_log_v.max(y[0].norm().ln() + log_scale);
            if m > RESCALE_ABOVE || (m < RESCALE_BELOW && m > 0.0) {
                let s = m.ln();
                let inv = (-s).exp();
                y[0] *= inv;
                y[1] *= inv;
                y[2] *= inv;
                log_scale += s;
            }
        })
        .map_err(|e| SolveError::Integration {
            radius: failure_radius(&e),
            source: e,
        })?;
        lo = hi;
    }

    let v1_abs = y[0].norm();
    let cond = (max_log_v - (v1_abs.ln() + log_scale)).exp();
    if v1_abs == 0.0 || cond > 1e12 {
        return Err(SolveError::NearSingular { cond });
    }
    let c_boundary = p.c.boundary_value();
    let g = -y[2] / (c_boundary * y[0]);

    // Weighted norm (∫₀¹ |rhs|² r^{d−1} dr)^{1/2} by composite Simpson,
    // independent of the adaptive path above.
    let v_norm = simpson_norm(rhs, dm1, 4096);

    Ok(InhomogSolution { g, v_norm })
}

fn simpson_norm(rhs: &dyn Fn(f64) -> Complex64, dm1: i32, n: usize) -> f64 {
    debug_assert!(n % 2 == 0);
    let h = 1.0 / n as f64;
    let weight = |r: f64| rhs(r).norm_sqr() * r.powi(dm1);
    let mut sum = weight(0.0) + weight(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * weight(i as f64 * h);
    }
    (sum * h / 3.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::constant_pair;
    use crate::spectral::sqrt_upper;

    fn unit_medium() -> (RadialProfile, RadialProfile) {
        (RadialProfile::constant(1.0), RadialProfile::constant(1.0))
    }

    #[test]
    fn ratio_self_consistency_across_tolerances() {
        let (c, n) = unit_medium();
        for ell in [0u32, 3, 17] {
            let p = ModeProblem {
                c: &c,
                n: &n,
                d: 2,
                ell,
                lambda: Complex64::new(7.0, 0.3),
            };
            let t8 = integrate_mode(&p, 1e-8).unwrap();
            let t10 = integrate_mode(&p, 1e-10).unwrap();
            let r8 = t8.dv1 / t8.v1;
            let r10 = t10.dv1 / t10.v1;
            assert!(
                (r8 - r10).norm() <= 1e-7 * r10.norm().max(1.0),
                "ell={ell}: {r8} vs {r10}"
            );
        }
    }

    #[test]
    fn riccati_and_linear_paths_agree_near_crossover() {
        let (c, n) = unit_medium();
        let lambda = Complex64::new(9.0, 0.5);
        let p40 = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 40,
            lambda,
        };
        let p41 = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 41,
            lambda,
        };
        // paths differ; compare each against a loosened re-run of itself and
        // check the DtN values vary smoothly in ell
        let t40 = integrate_mode(&p40, 1e-11).unwrap();
        let t41 = integrate_mode(&p41, 1e-11).unwrap();
        let m40 = t40.dv1 / t40.v1;
        let m41 = t41.dv1 / t41.v1;
        // Large-ell logarithmic derivatives grow like ell: the two
        // consecutive values should be within a few percent of each other
        // after removing the leading ell-proportionality.
        let r40 = m40.norm() / 40.0;
        let r41 = m41.norm() / 41.0;
        assert!((r40 - r41).abs() < 0.05 * r40, "{r40} vs {r41}");
    }

    #[test]
    fn dtn_scale_invariance() {
        let t = ModeTrace {
            v1: Complex64::new(0.3, -0.2),
            dv1: Complex64::new(1.5, 0.8),
            log_scale: 12.0,
        };
        let shifted = ModeTrace {
            log_scale: -40.0,
            ..t
        };
        let a = dtn_eigenvalue(&t, 0.05).unwrap();
        let b = dtn_eigenvalue(&shifted, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dtn_pole_detected() {
        let t = ModeTrace {
            v1: Complex64::new(0.0, 0.0),
            dv1: Complex64::new(1.0, 0.0),
            log_scale: 0.0,
        };
        assert!(matches!(
            dtn_eigenvalue(&t, 0.1),
            Err(SolveError::DtnPole { .. })
        ));
    }

    #[test]
    fn identical_media_characteristic_vanishes() {
        let pair = constant_pair(1.0, 2.0, 1.0, 2.0, 2);
        let w = itp_characteristic(Complex64::new(3.0, 0.1), 1, &pair, 1e-9).unwrap();
        assert_eq!(w.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn characteristic_conjugation_symmetry() {
        let pair = constant_pair(1.0, 1.0, 1.0, 4.0, 2);
        let lambda = Complex64::new(4.0, 0.25);
        let w = itp_characteristic(lambda, 2, &pair, 1e-10).unwrap();
        let wc = itp_characteristic(lambda.conj(), 2, &pair, 1e-10).unwrap();
        let a = w.value * (w.log_scale - wc.log_scale).exp();
        assert!((a.conj() - wc.value).norm() <= 1e-8 * wc.value.norm());
    }

    #[test]
    fn extreme_degree_stays_finite() {
        let (c, n) = unit_medium();
        let h = 0.01;
        let z = Complex64::new(-1.0, 0.0);
        let lambda = sqrt_upper(z) / h;
        let p = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 500,
            lambda,
        };
        let t = integrate_mode(&p, 1e-9).unwrap();
        let ratio = t.dv1 / t.v1;
        assert!(t.log_scale.is_finite());
        assert!(ratio.re.is_finite() && ratio.im.is_finite());
    }

    #[test]
    fn inhomogeneous_zero_rhs() {
        let (c, n) = unit_medium();
        let p = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 0,
            lambda: Complex64::new(3.0, 1.0),
        };
        let sol =
            inhomogeneous_mode_solve(&p, &|_r| Complex64::new(0.0, 0.0), 1e-9).unwrap();
        assert_eq!(sol.g, Complex64::new(0.0, 0.0));
        assert_eq!(sol.v_norm, 0.0);
    }

    #[test]
    fn inhomogeneous_manufactured_solution() {
        // w = r − r³ (d = 2, ℓ = 1, c = n = 1, w(1) = 0):
        // per-mode operator gives rhs = (h²·(−8r) + z(r − r³))/h
        // and g = −h·w'(1) = 2h.
        let (c, n) = unit_medium();
        let z = Complex64::new(0.0, 1.0);
        let h = 0.1;
        let lambda = sqrt_upper(z) / h;
        let p = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 1,
            lambda,
        };
        let rhs = move |r: f64| (Complex64::new(-8.0 * r * h * h, 0.0) + z * (r - r * r * r)) / h;
        let sol = inhomogeneous_mode_solve(&p, &rhs, 1e-10).unwrap();
        let expect = Complex64::new(2.0 * h, 0.0);
        assert!(
            (sol.g - expect).norm() < 1e-8,
            "g = {:?}, expected {:?}",
            sol.g,
            expect
        );
    }

    #[test]
    fn inhomogeneous_single_point_recorded() {
        let (c, n) = unit_medium();
        let z = Complex64::new(0.0, 1.0);
        let h = 0.1;
        let p = ModeProblem {
            c: &c,
            n: &n,
            d: 2,
            ell: 0,
            lambda: sqrt_upper(z) / h,
        };
        let sol = inhomogeneous_mode_solve(&p, &|_| Complex64::new(1.0, 0.0), 1e-9).unwrap();
        assert!(sol.g.norm().is_finite());
        let bound_scale = h.sqrt() * sol.v_norm; // θ = 1 at z = i
        println!(
            "recorded |g| = {:.6e}, K = {:.3}",
            sol.g.norm(),
            sol.g.norm() / bound_scale
        );
    }
}
