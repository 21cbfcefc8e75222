//! Numerical laboratory for interior transmission eigenvalues of radially
//! symmetric media with low-regularity coefficients.
//!
//! The crate is organised around the pipeline
//!
//! * [`profiles`] — piecewise-linear radial coefficients and the boundary-sign
//!   case classification,
//! * [`radial`] — per-angular-mode ODE shooting, Dirichlet-to-Neumann
//!   eigenvalues and the interior-transmission characteristic function,
//! * [`rootfind`] — argument-principle root localisation in the complex
//!   spectral plane,
//! * [`regions`] — eigenvalue-free-region formulas and threshold functions,
//! * [`psido`] — semiclassical pseudodifferential operators on the circle,
//! * [`parametrix`] — closed-form boundary symbols on the unit disc,
//! * [`verify`] — scaling-fit experiments tying the above together.
//!
//! All computations are deterministic: identical inputs produce identical
//! outputs regardless of the rayon worker count.

pub mod ode;
pub mod parametrix;
pub mod profiles;
pub mod psido;
pub mod radial;
pub mod regions;
pub mod rootfind;
pub mod spectral;
pub mod verify;

pub use num_complex::Complex64;

pub use profiles::{BoundaryData, CaseTag, MediumPair, RadialProfile};
pub use radial::{ModeProblem, ModeTrace};
pub use regions::{RegionExponents, RegionSpec};
pub use rootfind::{Root, SearchBox};
pub use spectral::{ScaledComplex, SpectralPoint, Zone};
