//! Embedded adaptive Runge–Kutta stepping on small complex state vectors.
//!
//! Dormand–Prince 5(4) with the usual proportional step controller. The
//! integrator works on one smooth interval; callers split at coefficient
//! breakpoints so derivative jumps never sit inside a step.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
}

/// Tolerances and budget for one integration call.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks a small fraction of the span.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h0: None,
            max_steps: 2_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate y' = f(t, y) from `t0` to `t1` (t0 < t1).
///
/// `on_accept` runs after every accepted step and may rescale the state in
/// place (the radial driver folds growth factors into a running log-scale).
pub fn integrate<const N: usize>(
    f: &impl Fn(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    ctrl: &StepControl,
    mut on_accept: impl FnMut(f64, &mut [Complex64; N]),
) -> Result<[Complex64; N], OdeError> {
    debug_assert!(t1 > t0);
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut h = ctrl.h0.unwrap_or(span * 1e-3).min(span);
    let zero = Complex64::new(0.0, 0.0);

    for _ in 0..ctrl.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t });
        }

        let mut k = [[zero; N]; 7];
        k[0] = f(t, &y);
        for s in 1..7 {
            let mut ys = y;
            for j in 0..s {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += k[j][i] * (a * h);
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }

        let mut y5 = y;
        let mut err_vec = [zero; N];
        for s in 0..7 {
            for i in 0..N {
                y5[i] += k[s][i] * (B5[s] * h);
                err_vec[i] += k[s][i] * ((B5[s] - B4[s]) * h);
            }
        }

        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..N {
            let yi = y[i].norm().max(y5[i].norm());
            finite &= y5[i].re.is_finite() && y5[i].im.is_finite();
            let sc = ctrl.atol + ctrl.rtol * yi;
            let e = err_vec[i].norm() / sc;
            err += e * e;
        }
        err = (err / N as f64).sqrt();
        if !finite {
            return Err(OdeError::NonFinite { t });
        }

        if err <= 1.0 {
            t += h;
            y = y5;
            on_accept(t, &mut y);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Err(OdeError::MaxSteps { t })
}
