//! Closed-form boundary symbols on the unit disc: the normal symbol ρ, the
//! corrected phase (φ₂, φ₃), the corrected amplitude (a₁, a₂), the h-order
//! boundary symbol q, and the boundary symbol algebra with its exact
//! factorization identity.
//!
//! Geometry: writing the polar Laplacian in the collar coordinate x₁ = 1 − r,
//!
//! ```text
//! −Δ = D_{x₁}² + (1−x₁)^{−2} D_{x'}² + i(1−x₁)^{−1} D_{x₁},
//! ```
//!
//! so R(x) = (1−x₁)^{−2} = 1 + 2x₁ + 3x₁² + …, Q₁ = i/(1−x₁) = i(1 + x₁ + …)
//! and the tangential first-order part vanishes. The chart cutoff is χ ≡ 1 on
//! the single-chart circle, so every ∇χ term drops.

use crate::profiles::BoundaryData;
use crate::spectral::sqrt_upper;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParametrixError {
    #[error("elliptic symbol undefined at xi = 0")]
    ZeroFrequency,
    #[error("m is undefined when c1 = c2 on the boundary")]
    EqualBoundarySpeeds,
}

/// Collar-expansion constants of the unit disc.
#[derive(Debug, Clone, Copy)]
pub struct DiscGeometry {
    pub r0_coeff: f64,
    pub r0_sharp: f64,
    pub r1_sharp: f64,
    pub q1_0: Complex64,
    pub q1_1: Complex64,
    pub qtilde_0: Complex64,
}

pub const DISC: DiscGeometry = DiscGeometry {
    r0_coeff: 1.0,
    r0_sharp: 2.0,
    r1_sharp: 3.0,
    q1_0: Complex64::new(0.0, 1.0),
    q1_1: Complex64::new(0.0, 1.0),
    qtilde_0: Complex64::new(0.0, 0.0),
};

/// Boundary data entering the normal symbol: the normalised spectral
/// parameter and the reduced index ñ₀ = n(1)/c(1) of one medium.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySymbolContext {
    pub z: Complex64,
    pub ntilde0: f64,
}

/// Normal symbol ρ(ξ) = √(−ξ² + z·ñ₀) with Im ρ ≥ 0.
pub fn rho(xi: f64, ctx: &BoundarySymbolContext) -> Complex64 {
    sqrt_upper(Complex64::new(-xi * xi, 0.0) + ctx.z * ctx.ntilde0)
}

/// Second phase coefficient: on the disc the first eikonal correction
/// 4i r₀^{1/2} φ₂ + R₀♯ ξ² = 0 gives φ₂ = (i/2)|ξ|.
pub fn phi2(xi: f64) -> Result<Complex64, ParametrixError> {
    if xi == 0.0 {
        return Err(ParametrixError::ZeroFrequency);
    }
    let r0_half = xi.abs();
    let num = Complex64::new(DISC.r0_sharp * xi * xi, 0.0);
    Ok(-num / (Complex64::new(0.0, 4.0) * r0_half))
}

/// Third phase coefficient from the second eikonal correction
/// 6i r₀^{1/2} φ₃ + 4φ₂² + R₁♯ ξ² = 0 (the tangential-gradient terms vanish
/// on the disc), giving φ₃ = (i/3)|ξ|.
pub fn phi3(xi: f64) -> Result<Complex64, ParametrixError> {
    if xi == 0.0 {
        return Err(ParametrixError::ZeroFrequency);
    }
    let r0_half = xi.abs();
    let p2 = phi2(xi)?;
    let num = p2 * p2 * 4.0 + Complex64::new(DISC.r1_sharp * xi * xi, 0.0);
    Ok(-num / (Complex64::new(0.0, 6.0) * r0_half))
}

/// First amplitude correction a₁ = a₁₀ + h·a₁₁. With χ ≡ 1 and no
/// tangential drift,
///
/// ```text
/// a₁₀ = i r₀^{−1/2} φ₂ − (i/2) Q₁₀,    a₁₁ = 0,
/// ```
///
/// and the disc constants give a₁₀ = 0 by exact cancellation.
pub fn a1_symbol(xi: f64) -> Result<(Complex64, Complex64), ParametrixError> {
    if xi == 0.0 {
        return Err(ParametrixError::ZeroFrequency);
    }
    let r0_half = xi.abs();
    let i = Complex64::new(0.0, 1.0);
    let a10 = i * phi2(xi)? / r0_half - i * 0.5 * DISC.q1_0;
    // every a₁₁ term carries ∇χ or the tangential drift, both zero here
    let a11 = Complex64::new(0.0, 0.0);
    Ok((a10, a11))
}

/// The h-order boundary symbol of the improved parametrix, q = −i·a₁₀.
/// Identically zero on the unit disc; independent of z, h and n by
/// construction (none of them enters).
pub fn q_symbol(xi: f64) -> Result<Complex64, ParametrixError> {
    let (a10, _) = a1_symbol(xi)?;
    Ok(-Complex64::new(0.0, 1.0) * a10)
}

/// Second amplitude correction a₂ from the next transport-order equation.
/// On the disc (a₁ = 0, ∇' terms zero) it reduces to
///
/// ```text
/// 4 r₀^{1/2} a₂ − 2i φ₃ + 2 Q₁₀ φ₂ + i Q₁₁ r₀^{1/2} = 0,
/// ```
///
/// a frequency-independent constant (degree 0), equal to 1/3.
pub fn a2_symbol(xi: f64) -> Result<Complex64, ParametrixError> {
    if xi == 0.0 {
        return Err(ParametrixError::ZeroFrequency);
    }
    let r0_half = xi.abs();
    let i = Complex64::new(0.0, 1.0);
    let rest = -i * 2.0 * phi3(xi)? + DISC.q1_0 * 2.0 * phi2(xi)? + i * DISC.q1_1 * r0_half;
    Ok(-rest / (4.0 * r0_half))
}

/// Residual of the defining equation of a₂ for an arbitrary trial value;
/// zero at the returned [`a2_symbol`] value.
pub fn a2_equation_residual(xi: f64, a2: Complex64) -> Result<Complex64, ParametrixError> {
    if xi == 0.0 {
        return Err(ParametrixError::ZeroFrequency);
    }
    let r0_half = xi.abs();
    let i = Complex64::new(0.0, 1.0);
    Ok(a2 * 4.0 * r0_half - i * 2.0 * phi3(xi)? + DISC.q1_0 * 2.0 * phi2(xi)? + i * DISC.q1_1 * r0_half)
}

/// Eikonal defect (∂_{x₁}φ)² + R(x₁)ξ² − zñ of the collar phase at depth x₁,
/// for constant coefficients on the disc. With `improved = false` the phase
/// is x₁ρ; with `improved = true` it carries the x₁²φ₂ + x₁³φ₃ corrections.
pub fn eikonal_defect(
    x1: f64,
    xi: f64,
    ctx: &BoundarySymbolContext,
    improved: bool,
) -> Result<Complex64, ParametrixError> {
    let r = rho(xi, ctx);
    let dphi = if improved {
        r + phi2(xi)? * (2.0 * x1) + phi3(xi)? * (3.0 * x1 * x1)
    } else {
        r
    };
    let rr = (1.0 - x1).powi(-2);
    Ok(dphi * dphi + rr * xi * xi - ctx.z * ctx.ntilde0)
}

/// The boundary symbol algebra of the inversion step.
#[derive(Debug, Clone, Copy)]
pub struct Section6Symbols {
    /// (r₀+1)^{−1/2}(c₁ρ₁ + c₂ρ₂)
    pub a1: Complex64,
    /// c₁ρ₁ − c₂ρ₂
    pub a2: Complex64,
    /// (c₁n₁ − c₂n₂)/(c₁² − c₂²)
    pub m: f64,
    /// (r₀+1)(r₀ − zm)^{−1}
    pub big_a1: Complex64,
    /// (r₀+1)^{−1/2}(r₀ − zm)
    pub big_a2: Complex64,
}

pub fn section6_symbols(
    bd: &BoundaryData,
    xi: f64,
    z: Complex64,
) -> Result<Section6Symbols, ParametrixError> {
    if bd.c1 == bd.c2 {
        return Err(ParametrixError::EqualBoundarySpeeds);
    }
    let r0 = xi * xi;
    let rho1 = rho(xi, &BoundarySymbolContext { z, ntilde0: bd.ntilde1 });
    let rho2 = rho(xi, &BoundarySymbolContext { z, ntilde0: bd.ntilde2 });
    let m = (bd.c1 * bd.n1 - bd.c2 * bd.n2) / (bd.c1 * bd.c1 - bd.c2 * bd.c2);
    let r0m = Complex64::new(r0, 0.0) - z * m;
    Ok(Section6Symbols {
        a1: (rho1 * bd.c1 + rho2 * bd.c2) / (r0 + 1.0).sqrt(),
        a2: rho1 * bd.c1 - rho2 * bd.c2,
        m,
        big_a1: (r0 + 1.0) / r0m,
        big_a2: r0m / (r0 + 1.0).sqrt(),
    })
}

/// Absolute residual of the factorization identity
///
/// ```text
/// (c₁ρ₁ + c₂ρ₂)(c₁ρ₁ − c₂ρ₂) = −(c₁² − c₂²) r₀ + z (c₁n₁ − c₂n₂),
/// ```
///
/// which holds exactly since c_j²ρ_j² = −c_j²r₀ + z c_j n_j.
pub fn factorization_identity_check(bd: &BoundaryData, xi: f64, z: Complex64) -> f64 {
    let r0 = xi * xi;
    let rho1 = rho(xi, &BoundarySymbolContext { z, ntilde0: bd.ntilde1 });
    let rho2 = rho(xi, &BoundarySymbolContext { z, ntilde0: bd.ntilde2 });
    let lhs = (rho1 * bd.c1 + rho2 * bd.c2) * (rho1 * bd.c1 - rho2 * bd.c2);
    let rhs = Complex64::new(-(bd.c1 * bd.c1 - bd.c2 * bd.c2) * r0, 0.0)
        + z * (bd.c1 * bd.n1 - bd.c2 * bd.n2);
    (lhs - rhs).norm()
}
