//! Eigenvalue-free-region formulas: exponent tables, membership predicates,
//! boundary-curve sampling and the semiclassical threshold functions.

use crate::profiles::CaseTag;
use num_complex::Complex64;
use num_rational::Ratio;
use thiserror::Error;

pub type Exponent = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("the degenerate case carries no free region")]
    UnsupportedCase,
    #[error("parameter out of range: {0}")]
    Domain(&'static str),
}

/// Exponents (p₁, p₂) of the parabolic region, plus (p₃, p₄) for the real-part
/// inequality that is added in the aniso-negative case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionExponents {
    pub p1: Exponent,
    pub p2: Exponent,
    pub p3: Option<Exponent>,
    pub p4: Option<Exponent>,
}

/// Exact exponent table, branching on μ against 2d−1 and 4d for the
/// isotropic/aniso-negative cases and against (4/3)(d+1) for aniso-positive.
pub fn exponents(case: CaseTag, mu: u32, d: u32) -> Result<RegionExponents, RegionError> {
    if mu < 2 {
        return Err(RegionError::Domain("mu must be >= 2"));
    }
    if d < 2 {
        return Err(RegionError::Domain("d must be >= 2"));
    }
    let mu = mu as i64;
    let d = d as i64;
    let q = |n: i64, m: i64| Ratio::new(n, m);
    match case {
        CaseTag::Degenerate => Err(RegionError::UnsupportedCase),
        CaseTag::Isotropic | CaseTag::AnisoNegative => {
            let (p1, p2) = if mu <= 2 * d - 1 {
                (q(mu, 2 * mu + 2 * d - 1), q(2, 2 * mu + 2 * d - 1))
            } else if mu <= 4 * d {
                (q(mu + 2, 2 * mu + 2 * d + 5), q(2, 2 * mu + 2 * d + 5))
            } else {
                (q(2, 5), q(0, 1))
            };
            let (p3, p4) = if case == CaseTag::AnisoNegative {
                (
                    Some(q(mu, 2 * mu + 2 * d + 2)),
                    Some(q(1, mu + d + 1)),
                )
            } else {
                (None, None)
            };
            Ok(RegionExponents { p1, p2, p3, p4 })
        }
        CaseTag::AnisoPositive => {
            // μ ≤ (4/3)(d+1)  ⇔  3μ ≤ 4(d+1)
            let (p1, p2) = if 3 * mu <= 4 * (d + 1) {
                (q(mu, 2 * mu + 2 * d + 2), q(1, mu + d + 1))
            } else {
                (q(2, 7), q(0, 1))
            };
            Ok(RegionExponents {
                p1,
                p2,
                p3: None,
                p4: None,
            })
        }
    }
}

/// A fully specified free region in the λ-plane.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub case: CaseTag,
    pub mu: u32,
    pub d: u32,
    pub c: f64,
    pub exponents: RegionExponents,
    /// Only used by the radial aniso-negative region.
    pub epsilon: f64,
}

impl RegionSpec {
    pub fn new(case: CaseTag, mu: u32, d: u32, c: f64, epsilon: f64) -> Result<Self, RegionError> {
        if !(c > 2.0) {
            return Err(RegionError::Domain("C must be > 2"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(RegionError::Domain("epsilon must lie in (0, 1/2)"));
        }
        let exponents = exponents(case, mu, d)?;
        Ok(Self {
            case,
            mu,
            d,
            c,
            exponents,
            epsilon,
        })
    }
}

fn ratio_f64(q: Exponent) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// |Im λ| boundary height of the parabolic region at modulus `t`.
fn parabola(c: f64, t: f64, p1: f64, p2: f64) -> f64 {
    c * t.powf(1.0 - p1) * t.ln().powf(p2)
}

/// Membership in the full-regularity free region: |λ| ≥ C together with the
/// case's parabolic inequalities. Natural logarithm throughout; any fixed
/// base is absorbed into C.
pub fn in_free_region(lambda: Complex64, spec: &RegionSpec) -> bool {
    let t = lambda.norm();
    if t < spec.c {
        return false;
    }
    let p1 = ratio_f64(spec.exponents.p1);
    let p2 = ratio_f64(spec.exponents.p2);
    if lambda.im.abs() < parabola(spec.c, t, p1, p2) {
        return false;
    }
    if spec.case == CaseTag::AnisoNegative {
        let p3 = ratio_f64(spec.exponents.p3.expect("aniso-negative has p3"));
        let p4 = ratio_f64(spec.exponents.p4.expect("aniso-negative has p4"));
        if lambda.re < parabola(spec.c, t, p3, p4) {
            return false;
        }
    }
    true
}

/// Membership in the radial (Lipschitz-coefficient) free regions: the 3/5
/// parabola for isotropic media, 3/5 plus the Re λ ≥ C|λ|^{1/2+ε} wedge for
/// aniso-negative, and the 5/7 parabola for aniso-positive. The degenerate
/// case certifies nothing and always returns false.
pub fn radial_free_region(lambda: Complex64, case: CaseTag, c: f64, epsilon: f64) -> bool {
    let t = lambda.norm();
    if t < c {
        return false;
    }
    match case {
        CaseTag::Degenerate => false,
        CaseTag::Isotropic => lambda.im.abs() >= c * t.powf(0.6),
        CaseTag::AnisoNegative => {
            lambda.im.abs() >= c * t.powf(0.6) && lambda.re >= c * t.powf(0.5 + epsilon)
        }
        CaseTag::AnisoPositive => lambda.im.abs() >= c * t.powf(5.0 / 7.0),
    }
}

/// One sample of the region boundary curve at a fixed modulus.
///
/// `re_lambda` is the completion onto the circle of that modulus; it is
/// `None` where the parabola height exceeds the modulus (the free region
/// does not meet that circle).
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub abs_lambda: f64,
    pub re_lambda: Option<f64>,
    pub im_plus: f64,
    pub im_minus: f64,
}

/// Sample the boundary curve |Im λ| = C|λ|^{1−p₁}(log|λ|)^{p₂} over a range
/// of moduli, both signs of Im λ.
pub fn boundary_curve(
    spec: &RegionSpec,
    abs_range: (f64, f64),
    n: usize,
) -> Result<Vec<CurveSample>, RegionError> {
    let (a, b) = abs_range;
    if a < spec.c {
        return Err(RegionError::Domain("range must start at or above C"));
    }
    if b < a || n < 2 {
        return Err(RegionError::Domain("need b >= a and n >= 2"));
    }
    let p1 = ratio_f64(spec.exponents.p1);
    let p2 = ratio_f64(spec.exponents.p2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = a + (b - a) * i as f64 / (n - 1) as f64;
        let im = parabola(spec.c, t, p1, p2);
        let re = if im <= t {
            Some((t * t - im * im).sqrt())
        } else {
            None
        };
        out.push(CurveSample {
            abs_lambda: t,
            re_lambda: re,
            im_plus: im,
            im_minus: -im,
        });
    }
    Ok(out)
}

/// The three §-style threshold functions of the semiclassical parameter:
/// θ₁ controls the isotropic inversion, θ₂ the aniso-positive one and τ₃
/// the aniso-negative one near the negative real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdValues {
    pub theta1: f64,
    pub theta2: f64,
    pub tau3: f64,
}

pub fn thresholds(h: f64, mu: u32, d: u32) -> Result<ThresholdValues, RegionError> {
    if !(h > 0.0 && h < 1.0) {
        return Err(RegionError::Domain("h must lie in (0, 1)"));
    }
    if mu < 2 || d < 2 {
        return Err(RegionError::Domain("mu and d must be >= 2"));
    }
    let mu_f = mu as f64;
    let d_f = d as f64;
    let log_term = (1.0 / h).ln();
    let theta1 = if mu <= 2 * d - 1 {
        (h.powf(mu_f / 2.0) * log_term).powf(1.0 / (d_f + mu_f - 0.5))
    } else if mu <= 4 * d {
        (h.powf(mu_f / 2.0 + 1.0) * log_term).powf(1.0 / (d_f + mu_f + 2.5))
    } else {
        h.powf(0.4)
    };
    let theta2 = if 3 * mu <= 4 * (d + 1) {
        (h.powf(mu_f / 2.0) * log_term).powf(1.0 / (d_f + mu_f + 1.0))
    } else {
        h.powf(2.0 / 7.0)
    };
    let tau3 = (h.powf(mu_f / 2.0) * log_term).powf(1.0 / (d_f + mu_f + 1.0));
    Ok(ThresholdValues {
        theta1,
        theta2,
        tau3,
    })
}
