//! Semiclassical pseudodifferential operators on the circle with symbols of
//! limited x-regularity: left quantization in the Fourier basis, semiclassical
//! Sobolev norms, operator norms by power iteration, the mollification split
//! and composition-remainder measurement.
//!
//! Symbols are sampled exactly at the circle frequencies ξ = hk, so the
//! quantization `(Op_h(a)f)(x) = Σ_k a(x, hk) f̂_k e^{ikx}` is exact for
//! symbols band-limited in x.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsidoError {
    #[error("grid size must be a power of two, got {0}")]
    GridNotPowerOfTwo(usize),
    #[error("x-grid too small: n_x = {n_x} < 2·k_max + 1 = {need}")]
    GridTooSmall { n_x: usize, need: usize },
    #[error("symbol contains non-finite values")]
    NonFinite,
    #[error("operator shapes do not match: {0}")]
    ShapeMismatch(&'static str),
    #[error("power iteration did not converge; last relative gap {gap:e}")]
    NoConvergence { gap: f64 },
    #[error("parameter out of range: {0}")]
    Domain(&'static str),
}

/// A symbol a(x, ξ) sampled on the grid x_j = 2πj/n_x, ξ = hk for integer
/// |k| ≤ k_max. Row-major over x, columns over k = −k_max..k_max.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    n_x: usize,
    h: f64,
    k_max: usize,
    values: Vec<Complex64>,
}

impl SymbolGrid {
    /// Sample a symbol closure on the grid.
    pub fn sample(
        n_x: usize,
        h: f64,
        k_max: usize,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self, PsidoError> {
        if !n_x.is_power_of_two() {
            return Err(PsidoError::GridNotPowerOfTwo(n_x));
        }
        let need = 2 * k_max + 1;
        if n_x < need {
            return Err(PsidoError::GridTooSmall { n_x, need });
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(PsidoError::Domain("h must lie in (0, 1]"));
        }
        let modes = 2 * k_max + 1;
        let mut values = Vec::with_capacity(n_x * modes);
        for j in 0..n_x {
            let x = 2.0 * PI * j as f64 / n_x as f64;
            for m in 0..modes {
                let k = m as i64 - k_max as i64;
                let v = f(x, h * k as f64);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(PsidoError::NonFinite);
                }
                values.push(v);
            }
        }
        Ok(Self {
            n_x,
            h,
            k_max,
            values,
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn value(&self, j: usize, k: i64) -> Complex64 {
        let m = (k + self.k_max as i64) as usize;
        self.values[j * (2 * self.k_max + 1) + m]
    }

    /// Pointwise product a·b on a shared grid.
    pub fn product(&self, other: &Self) -> Result<Self, PsidoError> {
        if self.n_x != other.n_x || self.k_max != other.k_max || self.h != other.h {
            return Err(PsidoError::ShapeMismatch("product"));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            n_x: self.n_x,
            h: self.h,
            k_max: self.k_max,
            values,
        })
    }

    /// Max-norm over the grid, used for mollification decay checks.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of the difference on a shared grid.
    pub fn sup_abs_diff(&self, other: &Self) -> Result<f64, PsidoError> {
        if self.n_x != other.n_x || self.k_max != other.k_max {
            return Err(PsidoError::ShapeMismatch("sup_abs_diff"));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Finite section of Op_h(a) acting on trigonometric polynomials of degree
/// ≤ k_max, stored dense in the Fourier basis e^{ikx}.
#[derive(Debug, Clone)]
pub struct CircleOperator {
    h: f64,
    k_max: usize,
    /// Row-major (2k_max+1)², entry (j, k) = x-Fourier coefficient j−k of a(·, hk).
    mat: Vec<Complex64>,
}

impl CircleOperator {
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }
    pub fn dim(&self) -> usize {
        2 * self.k_max + 1
    }
    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        for j in 0..n {
            let row = &self.mat[j * n..(j + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += row[k] * v[k];
            }
            out[j] = acc;
        }
    }

    pub fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for o in out.iter_mut() {
            *o = Complex64::new(0.0, 0.0);
        }
        for j in 0..n {
            let row = &self.mat[j * n..(j + 1) * n];
            let vj = v[j];
            for k in 0..n {
                out[k] += row[k].conj() * vj;
            }
        }
    }

    /// A − B entrywise.
    pub fn sub(&self, other: &Self) -> Result<Self, PsidoError> {
        if self.k_max != other.k_max || self.h != other.h {
            return Err(PsidoError::ShapeMismatch("sub"));
        }
        Ok(Self {
            h: self.h,
            k_max: self.k_max,
            mat: self
                .mat
                .iter()
                .zip(other.mat.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Left quantization: matrix entry (j, k) is the x-Fourier coefficient of
/// order j−k of the ξ-slice a(·, hk). Exact for symbols band-limited in x.
pub fn quantize(a: &SymbolGrid) -> CircleOperator {
    let n = 2 * a.k_max + 1;
    let n_x = a.n_x;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_x);
    let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
    let mut col = vec![Complex64::new(0.0, 0.0); n_x];
    let inv_nx = 1.0 / n_x as f64;
    let half = (n_x / 2) as i64;
    for m in 0..n {
        let k = m as i64 - a.k_max as i64;
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = a.value(j, k);
        }
        fft.process(&mut col);
        // coefficient of e^{ipx} sits at DFT bin p mod n_x
        for row in 0..n {
            let p = row as i64 - a.k_max as i64 - k;
            if p >= -half && p < half {
                let bin = p.rem_euclid(n_x as i64) as usize;
                mat[row * n + m] = col[bin] * inv_nx;
            }
        }
    }
    CircleOperator {
        h: a.h,
        k_max: a.k_max,
        mat,
    }
}

/// Semiclassical Sobolev norm of a Fourier-coefficient vector indexed
/// m = −k_max..k_max: (Σ ⟨hm⟩^{2k} |f̂_m|²)^{1/2}.
pub fn h_sobolev_norm(fhat: &[Complex64], k: f64, h: f64) -> f64 {
    let k_max = (fhat.len() - 1) / 2;
    let mut sum = 0.0;
    for (i, c) in fhat.iter().enumerate() {
        let m = i as i64 - k_max as i64;
        let xi = h * m as f64;
        let w = (1.0 + xi * xi).powf(k);
        sum += w * c.norm_sqr();
    }
    sum.sqrt()
}

fn bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// Abstract linear map on the mode space, so operator norms of differences
/// and compositions never require forming matrix products.
pub trait LinMap {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]);
    fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]);
}

impl LinMap for CircleOperator {
    fn dim(&self) -> usize {
        CircleOperator::dim(self)
    }
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        CircleOperator::apply(self, v, out)
    }
    fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        CircleOperator::apply_adjoint(self, v, out)
    }
}

/// Op(a₁)Op(a₂) − Op(a₁a₂) as a lazy map.
struct RemainderMap<'a> {
    op1: &'a CircleOperator,
    op2: &'a CircleOperator,
    op12: &'a CircleOperator,
}

impl LinMap for RemainderMap<'_> {
    fn dim(&self) -> usize {
        self.op1.dim()
    }
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let mut tmp = vec![Complex64::new(0.0, 0.0); v.len()];
        self.op2.apply(v, &mut tmp);
        self.op1.apply(&tmp, out);
        self.op12.apply(v, &mut tmp);
        for i in 0..v.len() {
            out[i] -= tmp[i];
        }
    }
    fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        let mut tmp = vec![Complex64::new(0.0, 0.0); v.len()];
        self.op1.apply_adjoint(v, &mut tmp);
        self.op2.apply_adjoint(&tmp, out);
        self.op12.apply_adjoint(v, &mut tmp);
        for i in 0..v.len() {
            out[i] -= tmp[i];
        }
    }
}

/// H_h^{k_from} → L² operator norm of a map, via power iteration on the
/// normal operator of the right-weighted matrix. Deterministic start vector;
/// relative tolerance 1e-8.
pub fn op_norm_map(map: &dyn LinMap, k_from: f64, h: f64) -> Result<f64, PsidoError> {
    let n = map.dim();
    let k_max = (n - 1) / 2;
    let weight: Vec<f64> = (0..n)
        .map(|i| bracket(h * (i as i64 - k_max as i64) as f64).powf(-k_from))
        .collect();

    // fixed-seed start vector (deterministic across runs and worker counts)
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut x: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    normalize(&mut x);

    let mut bx = vec![Complex64::new(0.0, 0.0); n];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma_prev = -1.0;
    let mut gap = f64::INFINITY;
    for _ in 0..10_000 {
        // B = A·diag(weight): bx = A (w ⊙ x)
        for i in 0..n {
            tmp[i] = x[i] * weight[i];
        }
        map.apply(&tmp, &mut bx);
        let sigma = norm2(&bx);
        // round-off-level norms (exact cancellations) never settle relatively
        if sigma <= 1e-13 {
            return Ok(sigma);
        }
        // x ← normalized B*·(B x)
        map.apply_adjoint(&bx, &mut tmp);
        for i in 0..n {
            x[i] = tmp[i] * weight[i];
        }
        normalize(&mut x);
        gap = (sigma - sigma_prev).abs() / sigma;
        if gap <= 1e-8 {
            return Ok(sigma);
        }
        sigma_prev = sigma;
    }
    Err(PsidoError::NoConvergence { gap })
}

/// H_h^{k_from} → L² norm of a quantized operator.
pub fn op_norm(a: &CircleOperator, k_from: f64) -> Result<f64, PsidoError> {
    op_norm_map(a, k_from, a.h)
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm2(v);
    if n > 0.0 {
        for c in v.iter_mut() {
            *c /= n;
        }
    }
}

/// The fixed mollifier: compactly supported bump on [−1, 1], normalised to
/// unit mass. Mass and cosine moments use 129-point composite Simpson.
fn bump_raw(w: f64) -> f64 {
    if w.abs() < 1.0 {
        (-1.0 / (1.0 - w * w)).exp()
    } else {
        0.0
    }
}

fn simpson_bump(f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 128; // 129 points
    let h = 2.0 / N as f64;
    let mut sum = f(-1.0) + f(1.0);
    for i in 1..N {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(-1.0 + i as f64 * h);
    }
    sum * h / 3.0
}

/// ∫ φ₀(w) cos(u w) dw for the normalised bump φ₀.
pub fn mollifier_cos_moment(u: f64) -> f64 {
    let mass = simpson_bump(bump_raw);
    simpson_bump(|w| bump_raw(w) * (u * w).cos()) / mass
}

/// Mollify in x: a_t(x, ξ) = ∫ φ₀(w) a(x + t w, ξ) dw.
///
/// On the periodic grid this is exactly a multiplier in the x frequency:
/// coefficient m is damped by ∫ φ₀(w) cos(m t w) dw (the bump is even, so
/// the moment is real). In particular x-independent symbols are fixed.
pub fn mollify(a: &SymbolGrid, t: f64) -> Result<SymbolGrid, PsidoError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(PsidoError::Domain("t must lie in (0, 1]"));
    }
    let n_x = a.n_x;
    let modes = 2 * a.k_max + 1;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_x);
    let inv = planner.plan_fft_inverse(n_x);
    let half = n_x / 2;
    let damps: Vec<f64> = (0..n_x)
        .map(|bin| {
            let m = if bin <= half {
                bin as i64
            } else {
                bin as i64 - n_x as i64
            };
            mollifier_cos_moment(m as f64 * t)
        })
        .collect();

    let mut values = a.values.clone();
    let mut col = vec![Complex64::new(0.0, 0.0); n_x];
    for m in 0..modes {
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = values[j * modes + m];
        }
        fwd.process(&mut col);
        for (bin, c) in col.iter_mut().enumerate() {
            *c *= damps[bin] / n_x as f64;
        }
        inv.process(&mut col);
        for (j, slot) in col.iter().enumerate() {
            values[j * modes + m] = *slot;
        }
    }
    Ok(SymbolGrid {
        n_x,
        h: a.h,
        k_max: a.k_max,
        values,
    })
}

/// ‖Op(a₁)Op(a₂) − Op(a₁a₂)‖ measured H_h^k → L².
pub fn composition_remainder(a1: &SymbolGrid, a2: &SymbolGrid, k: f64) -> Result<f64, PsidoError> {
    if a1.h != a2.h || a1.k_max != a2.k_max || a1.n_x != a2.n_x {
        return Err(PsidoError::ShapeMismatch("composition_remainder"));
    }
    let op1 = quantize(a1);
    let op2 = quantize(a2);
    let op12 = quantize(&a1.product(a2)?);
    let map = RemainderMap {
        op1: &op1,
        op2: &op2,
        op12: &op12,
    };
    op_norm_map(&map, k, a1.h)
}

/// Frequency cutoff η: 1 for r₀ = ξ² ≤ C₀, 0 for r₀ ≥ 2C₀, quintic
/// smoothstep in r₀ between; constant in x.
pub fn eta_cutoff(c0: f64, n_x: usize, h: f64, k_max: usize) -> Result<SymbolGrid, PsidoError> {
    if !(c0 > 0.0) {
        return Err(PsidoError::Domain("C0 must be positive"));
    }
    SymbolGrid::sample(n_x, h, k_max, move |_x, xi| {
        Complex64::new(eta_value(c0, xi * xi), 0.0)
    })
}

/// Scalar η as a function of r₀ = ξ'².
pub fn eta_value(c0: f64, r0: f64) -> f64 {
    if r0 <= c0 {
        1.0
    } else if r0 >= 2.0 * c0 {
        0.0
    } else {
        let s = (r0 - c0) / c0;
        1.0 - (6.0 * s.powi(5) - 15.0 * s.powi(4) + 10.0 * s.powi(3))
    }
}
