//! Piecewise-linear radial coefficient profiles on [0, 1], medium pairs and
//! the boundary-sign case classification.

use thiserror::Error;

/// A piecewise-linear function of the radius, given by strictly increasing
/// breakpoints and the values taken there.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("profile needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("breakpoints and values must have equal length")]
    LengthMismatch,
    #[error("breakpoint {index} is not finite or not strictly increasing")]
    BadBreakpoint { index: usize },
    #[error("value at breakpoint {index} is not finite")]
    BadValue { index: usize },
    #[error("evaluation point r = {r} outside the profile domain")]
    OutOfDomain { r: f64 },
}

/// Which validation rule a profile breaks, and where.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Value at `index` lies below the declared floor b₀.
    BelowFloor { index: usize, value: f64, b0: f64 },
    /// Breakpoints do not span the full interval [0, 1].
    DomainIncomplete { first: f64, last: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BelowFloor { index, value, b0 } => {
                write!(f, "value {value} at breakpoint {index} is below b0 = {b0}")
            }
            Violation::DomainIncomplete { first, last } => {
                write!(f, "domain incomplete: breakpoints span [{first}, {last}], need [0, 1]")
            }
        }
    }
}

impl RadialProfile {
    /// Build a profile, checking shape only (finiteness, strict monotonicity).
    /// The [0,1] span and the b₀ floor are checked by [`RadialProfile::validate`].
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, ProfileError> {
        if breakpoints.len() < 2 {
            return Err(ProfileError::TooFewBreakpoints);
        }
        if breakpoints.len() != values.len() {
            return Err(ProfileError::LengthMismatch);
        }
        for (i, &b) in breakpoints.iter().enumerate() {
            if !b.is_finite() || (i > 0 && b <= breakpoints[i - 1]) {
                return Err(ProfileError::BadBreakpoint { index: i });
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ProfileError::BadValue { index: i });
            }
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Constant profile on [0, 1].
    pub fn constant(value: f64) -> Self {
        Self::new(vec![0.0, 1.0], vec![value, value]).expect("constant profile is well-formed")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at r = 1 (the boundary of the unit ball).
    pub fn boundary_value(&self) -> f64 {
        *self.values.last().expect("profile is nonempty")
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear interpolation, exact at breakpoints.
    pub fn eval(&self, r: f64) -> Result<f64, ProfileError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(ProfileError::OutOfDomain { r });
        }
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        if r < first || r > last {
            return Err(ProfileError::OutOfDomain { r });
        }
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&r).unwrap())
        {
            Ok(i) => Ok(self.values[i]),
            Err(i) => {
                let (b0, b1) = (self.breakpoints[i - 1], self.breakpoints[i]);
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                let t = (r - b0) / (b1 - b0);
                Ok(v0 + t * (v1 - v0))
            }
        }
    }

    /// Check the coefficient hypotheses: values at or above b₀ and a domain
    /// spanning [0, 1].
    pub fn validate(&self, b0: f64) -> Result<(), Violation> {
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        if first != 0.0 || last != 1.0 {
            return Err(Violation::DomainIncomplete { first, last });
        }
        for (i, &v) in self.values.iter().enumerate() {
            if v < b0 {
                return Err(Violation::BelowFloor {
                    index: i,
                    value: v,
                    b0,
                });
            }
        }
        Ok(())
    }

    /// Slope and intercept of the linear piece containing `[lo, hi]`, which
    /// must not straddle a breakpoint. Used by the radial integrator, whose
    /// steps never cross breakpoints.
    pub(crate) fn segment_coeffs(&self, lo: f64, hi: f64) -> (f64, f64) {
        debug_assert!(lo <= hi);
        let mid = 0.5 * (lo + hi);
        let i = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&mid).unwrap())
        {
            Ok(i) => i.max(1),
            Err(i) => i.min(self.breakpoints.len() - 1).max(1),
        };
        let (b0, b1) = (self.breakpoints[i - 1], self.breakpoints[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let slope = (v1 - v0) / (b1 - b0);
        (slope, v0 - slope * b0)
    }

    /// `true` if every breakpoint value equals 1 exactly.
    pub fn is_identically_one(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }
}

/// Case classification of a medium pair at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Isotropic,
    AnisoNegative,
    AnisoPositive,
    Degenerate,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::Isotropic => "isotropic",
            CaseTag::AnisoNegative => "aniso-negative",
            CaseTag::AnisoPositive => "aniso-positive",
            CaseTag::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Two media (c₁, n₁) and (c₂, n₂) on the unit ball in dimension d.
#[derive(Debug, Clone)]
pub struct MediumPair {
    pub c1: RadialProfile,
    pub n1: RadialProfile,
    pub c2: RadialProfile,
    pub n2: RadialProfile,
    pub d: u32,
}

/// Boundary restrictions of the four profiles and the reduced indices
/// ñ_j = n_j(1)/c_j(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub c1: f64,
    pub n1: f64,
    pub c2: f64,
    pub n2: f64,
    pub ntilde1: f64,
    pub ntilde2: f64,
}

impl MediumPair {
    pub fn new(
        c1: RadialProfile,
        n1: RadialProfile,
        c2: RadialProfile,
        n2: RadialProfile,
        d: u32,
    ) -> Result<Self, ProfileError> {
        if d < 2 {
            // d enters only through the ODE coefficients; d = 1 has no
            // spherical reduction in this form.
            return Err(ProfileError::OutOfDomain { r: d as f64 });
        }
        Ok(Self { c1, n1, c2, n2, d })
    }

    /// Validate all four profiles against a common floor b₀.
    pub fn validate(&self, b0: f64) -> Result<(), (&'static str, Violation)> {
        self.c1.validate(b0).map_err(|v| ("c1", v))?;
        self.n1.validate(b0).map_err(|v| ("n1", v))?;
        self.c2.validate(b0).map_err(|v| ("c2", v))?;
        self.n2.validate(b0).map_err(|v| ("n2", v))?;
        Ok(())
    }

    pub fn boundary_data(&self) -> BoundaryData {
        let c1 = self.c1.boundary_value();
        let n1 = self.n1.boundary_value();
        let c2 = self.c2.boundary_value();
        let n2 = self.n2.boundary_value();
        BoundaryData {
            c1,
            n1,
            c2,
            n2,
            ntilde1: n1 / c1,
            ntilde2: n2 / c2,
        }
    }

    /// Boundary-sign classification.
    ///
    /// Isotropic requires c₁ ≡ c₂ ≡ 1 on the whole ball (all breakpoint
    /// values equal to 1), not merely at the boundary, plus a boundary
    /// contrast n₁(1) ≠ n₂(1). The anisotropic tags follow the sign of
    /// (c₁ − c₂)(c₁n₁ − c₂n₂) at r = 1.
    pub fn classify(&self) -> CaseTag {
        let bd = self.boundary_data();
        if self.c1.is_identically_one() && self.c2.is_identically_one() {
            return if bd.n1 != bd.n2 {
                CaseTag::Isotropic
            } else {
                CaseTag::Degenerate
            };
        }
        let product = (bd.c1 - bd.c2) * (bd.c1 * bd.n1 - bd.c2 * bd.n2);
        if product < 0.0 {
            CaseTag::AnisoNegative
        } else if product > 0.0 {
            CaseTag::AnisoPositive
        } else {
            CaseTag::Degenerate
        }
    }

    /// Swap the two media.
    pub fn swapped(&self) -> Self {
        Self {
            c1: self.c2.clone(),
            n1: self.n2.clone(),
            c2: self.c1.clone(),
            n2: self.n1.clone(),
            d: self.d,
        }
    }

    /// Largest value of √(n/c) over both media. Ratios of linear pieces are
    /// monotone between breakpoints, so the sup is attained at a breakpoint
    /// of the union grid.
    pub fn sup_sqrt_index(&self) -> f64 {
        let mut sup: f64 = 0.0;
        for (c, n) in [(&self.c1, &self.n1), (&self.c2, &self.n2)] {
            let mut grid: Vec<f64> = c
                .breakpoints()
                .iter()
                .chain(n.breakpoints().iter())
                .cloned()
                .collect();
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for r in grid {
                let r = r.clamp(0.0, 1.0);
                if let (Ok(cv), Ok(nv)) = (c.eval(r), n.eval(r)) {
                    if cv > 0.0 {
                        sup = sup.max((nv / cv).sqrt());
                    }
                }
            }
        }
        sup
    }
}

/// Convenience constructor for pairs of constant media.
pub fn constant_pair(c1: f64, n1: f64, c2: f64, n2: f64, d: u32) -> MediumPair {
    MediumPair::new(
        RadialProfile::constant(c1),
        RadialProfile::constant(n1),
        RadialProfile::constant(c2),
        RadialProfile::constant(n2),
        d,
    )
    .expect("constant pair is well-formed")
}
