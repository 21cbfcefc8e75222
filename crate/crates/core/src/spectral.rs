//! Complex scalar conventions shared by every other module: the
//! λ ↦ (h, z, θ, τ) map and the Im-positive square-root branch.

use num_complex::Complex64;
use thiserror::Error;

/// Which closed half of the unit circle the normalised spectral parameter
/// z = (hλ)² falls on. `ZPlus` is Re z ≥ 0, `ZMinus` is Re z ≤ 0; the tie
/// Re z = 0 resolves to `ZPlus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    ZPlus,
    ZMinus,
}

/// A spectral parameter λ together with its derived semiclassical data.
///
/// Invariants (all established by [`spectral_point`]):
/// * `h = 1/|lambda|`,
/// * `z = (h·lambda)²` with `|z| = 1` up to round-off,
/// * `theta = |Im z|` on `ZPlus`, else 1,
/// * `tau = |Im z|` on `ZMinus`, else 1.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub h: f64,
    pub z: Complex64,
    pub zone: Zone,
    pub theta: f64,
    pub tau: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("lambda must be finite and nonzero, got {0}")]
    InvalidLambda(Complex64),
}

/// Derive the semiclassical data of a spectral parameter.
pub fn spectral_point(lambda: Complex64) -> Result<SpectralPoint, SpectralError> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() || lambda == Complex64::new(0.0, 0.0) {
        return Err(SpectralError::InvalidLambda(lambda));
    }
    let modulus = lambda.norm();
    let h = 1.0 / modulus;
    // (hλ)² computed from the normalised direction so |z| = 1 to round-off.
    let dir = lambda / modulus;
    let z = dir * dir;
    let zone = if z.re >= 0.0 { Zone::ZPlus } else { Zone::ZMinus };
    let (theta, tau) = match zone {
        Zone::ZPlus => (z.im.abs(), 1.0),
        Zone::ZMinus => (1.0, z.im.abs()),
    };
    Ok(SpectralPoint {
        lambda,
        h,
        z,
        zone,
        theta,
        tau,
    })
}

/// Square root with the branch Im √w ≥ 0; on the non-negative real axis
/// (Im √w = 0) the root with Re √w ≥ 0 is chosen.
///
/// This is the branch convention of the normal symbol ρ: decaying modes
/// carry e^{i x₁ ρ / h} into the interior.
pub fn sqrt_upper(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    // Principal sqrt keeps Re ≥ 0; flip into the closed upper half plane.
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// A complex value stored as `value · e^{log_scale}` with real `log_scale`.
///
/// Radial shooting produces values whose modulus spans thousands of orders of
/// magnitude; keeping the scale separate keeps every arithmetic step inside
/// f64 range. Since the removed factor is real and positive, the argument of
/// `value` equals the argument of the represented number exactly.
#[derive(Debug, Clone, Copy)]
pub struct ScaledComplex {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn new(value: Complex64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    /// Wrap an ordinary complex number (scale 0).
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            log_scale: 0.0,
        }
    }

    /// Natural log of the modulus of the represented number.
    pub fn log_abs(&self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }

    /// Argument of the represented number.
    pub fn arg(&self) -> f64 {
        self.value.arg()
    }

    /// The represented number re-expressed with the given scale.
    ///
    /// Underflows to 0 (or overflows to ±inf) if the scales differ by more
    /// than f64 range; callers pick `log_scale` near the values they compare.
    pub fn with_scale(&self, log_scale: f64) -> Complex64 {
        self.value * (self.log_scale - log_scale).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_lambda_lands_on_z_plus() {
        let p = spectral_point(c(2.0, 0.0)).unwrap();
        assert_eq!(p.h, 0.5);
        assert!((p.z - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.zone, Zone::ZPlus);
        assert_eq!(p.theta, 0.0);
        assert_eq!(p.tau, 1.0);
    }

    #[test]
    fn diagonal_lambda_gives_z_i() {
        let p = spectral_point(c(1.0, 1.0)).unwrap();
        assert!((p.h - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.z - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(p.zone, Zone::ZPlus);
        assert!((p.theta - 1.0).abs() < 1e-15);
        assert_eq!(p.tau, 1.0);
    }

    #[test]
    fn imaginary_lambda_lands_on_z_minus() {
        let p = spectral_point(c(0.0, 3.0)).unwrap();
        assert!((p.z - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.zone, Zone::ZMinus);
        assert_eq!(p.theta, 1.0);
        assert!(p.tau.abs() < 1e-15);
    }

    #[test]
    fn zero_and_nonfinite_lambda_rejected() {
        assert!(spectral_point(c(0.0, 0.0)).is_err());
        assert!(spectral_point(c(f64::NAN, 0.0)).is_err());
        assert!(spectral_point(c(1.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn sqrt_upper_negative_real_axis() {
        let s = sqrt_upper(c(-1.0, 0.0));
        assert!((s - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_upper_principal_case() {
        let s = sqrt_upper(c(0.0, 1.0));
        let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((s - e).norm() < 1e-15);
    }

    #[test]
    fn sqrt_upper_squaring_oracle() {
        let w = c(-1.0, 2.0);
        let s = sqrt_upper(w);
        assert!((s * s - w).norm() <= 1e-12 * w.norm());
        assert!(s.im >= 0.0);
        assert!((s.re - 0.786).abs() < 5e-3 && (s.im - 1.272).abs() < 5e-3);
    }

    #[test]
    fn scaled_complex_roundtrip() {
        let a = ScaledComplex::new(c(1.0, 2.0), 3.0);
        let direct = c(1.0, 2.0) * 3.0f64.exp();
        assert!((a.with_scale(0.0) - direct).norm() < 1e-12);
        assert!((a.log_abs() - direct.norm().ln()).abs() < 1e-12);
    }
}
