//! Complex root localisation for analytic functions via the argument
//! principle: adaptive contour argument tracking, recursive box subdivision
//! and damped-Newton refinement.
//!
//! Functions are evaluated as [`ScaledComplex`] so characteristic functions
//! whose modulus spans thousands of orders of magnitude can be searched
//! directly; all winding arithmetic uses arguments and log-moduli only.

use crate::profiles::{CaseTag, MediumPair};
use crate::radial::{itp_characteristic, SolveError};
use crate::spectral::ScaledComplex;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Rectangular search window in the λ-plane.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Boxes at or below this diameter are not subdivided further.
    pub min_size: f64,
}

impl SearchBox {
    pub fn new(re: (f64, f64), im: (f64, f64), min_size: f64) -> Result<Self, RootError> {
        if !(re.0 < re.1 && im.0 < im.1) || !(min_size > 0.0) {
            return Err(RootError::BadBox);
        }
        Ok(Self { re, im, min_size })
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn diameter(&self) -> f64 {
        (self.re.1 - self.re.0).hypot(self.im.1 - self.im.0)
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    fn expanded(&self, factor: f64) -> Self {
        let cr = 0.5 * (self.re.0 + self.re.1);
        let ci = 0.5 * (self.im.0 + self.im.1);
        let hr = 0.5 * (self.re.1 - self.re.0) * factor;
        let hi = 0.5 * (self.im.1 - self.im.0) * factor;
        Self {
            re: (cr - hr, cr + hr),
            im: (ci - hi, ci + hi),
            min_size: self.min_size,
        }
    }

    /// Four children cut slightly off-centre so families of roots on
    /// symmetry axes (e.g. the real axis) do not all land on shared edges.
    fn quadrisect(&self) -> [Self; 4] {
        const T: f64 = 0.503;
        let mr = self.re.0 + T * (self.re.1 - self.re.0);
        let mi = self.im.0 + T * (self.im.1 - self.im.0);
        let mk = |re: (f64, f64), im: (f64, f64)| Self {
            re,
            im,
            min_size: self.min_size,
        };
        [
            mk((self.re.0, mr), (self.im.0, mi)),
            mk((mr, self.re.1), (self.im.0, mi)),
            mk((self.re.0, mr), (mi, self.im.1)),
            mk((mr, self.re.1), (mi, self.im.1)),
        ]
    }
}

/// A refined zero of the characteristic function.
#[derive(Debug, Clone)]
pub struct Root {
    pub lambda: Complex64,
    /// Angular mode with the smallest refined residual at this root.
    pub ell: u32,
    /// |W| at the refined point relative to the local scale of W.
    pub residual: f64,
    /// Zero count (with multiplicity) of the smallest enclosing box.
    pub winding: u32,
    /// All modes contributing a zero at this λ (deduplication across modes).
    pub contributing: Vec<u32>,
}

/// Root located by [`find_roots`] for a single function.
#[derive(Debug, Clone, Copy)]
pub struct Located {
    pub lambda: Complex64,
    pub residual: f64,
    pub winding: u32,
}

#[derive(Debug, Error)]
pub enum RootError {
    #[error("malformed search box")]
    BadBox,
    #[error("function vanishes on (or too near) the contour: min log|f| − median log|f| = {gap:.2}")]
    ContourProximity { gap: f64 },
    #[error("winding number did not settle to an integer (residual {residual:.3})")]
    WindingUnresolved { residual: f64 },
    #[error("evaluation budget exhausted; partial result holds {} roots", partial.len())]
    BudgetExhausted { partial: Vec<Located> },
    #[error("degenerate medium pair admits no characteristic search")]
    DegeneratePair,
    #[error("function evaluation failed: {0}")]
    Eval(String),
}

/// Outcome of a spectrum search, including per-mode failures that did not
/// abort the remaining modes.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub roots: Vec<Root>,
    pub mode_failures: Vec<(u32, String)>,
}

pub type EvalFn<'a> = dyn Fn(Complex64) -> Result<ScaledComplex, String> + Sync + 'a;

/// Wrap a plain analytic closure as an evaluation function.
pub fn exact_fn(f: impl Fn(Complex64) -> Complex64 + Sync) -> impl Fn(Complex64) -> Result<ScaledComplex, String> + Sync {
    move |z| Ok(ScaledComplex::exact(f(z)))
}

struct Budget {
    used: std::cell::Cell<usize>,
    cap: usize,
}

impl Budget {
    fn new(cap: usize) -> Self {
        Self {
            used: std::cell::Cell::new(0),
            cap,
        }
    }
    fn spend(&self, n: usize) -> bool {
        let u = self.used.get() + n;
        self.used.set(u);
        u <= self.cap
    }
}

const DEFAULT_BUDGET: usize = 6_000_000;
const JITTER_FACTOR: f64 = 1.017;
const MAX_JITTER: usize = 3;
/// Contour sample is treated as "on a zero" when its log-modulus collapses
/// this far below the contour median. Radial characteristics legitimately
/// span many tens of orders of magnitude across a large window, so this is
/// a deep sanity floor only; roots merely near the contour surface instead
/// as unresolved winding residuals, which trigger the same jitter path.
const PROXIMITY_LOG_GAP: f64 = -138.0;

#[derive(Clone, Copy)]
struct Sample {
    z: Complex64,
    log_abs: f64,
    arg: f64,
}

fn eval_sample(f: &EvalFn, z: Complex64, budget: &Budget) -> Result<Sample, RootError> {
    if !budget.spend(1) {
        return Err(RootError::BudgetExhausted { partial: vec![] });
    }
    let v = f(z).map_err(RootError::Eval)?;
    Ok(Sample {
        z,
        log_abs: v.log_abs(),
        arg: v.arg(),
    })
}

fn wrap_to_pi(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Walk the box boundary counter-clockwise, adaptively bisecting segments
/// until every argument increment is at most `cap`, then return the samples.
fn contour_samples(
    f: &EvalFn,
    b: &SearchBox,
    cap: f64,
    budget: &Budget,
) -> Result<Vec<Sample>, RootError> {
    let corners = [
        Complex64::new(b.re.0, b.im.0),
        Complex64::new(b.re.1, b.im.0),
        Complex64::new(b.re.1, b.im.1),
        Complex64::new(b.re.0, b.im.1),
    ];
    const PER_EDGE: usize = 16;
    let mut nodes: Vec<Sample> = Vec::with_capacity(4 * PER_EDGE + 1);
    for e in 0..4 {
        let a = corners[e];
        let c = corners[(e + 1) % 4];
        for j in 0..PER_EDGE {
            let t = j as f64 / PER_EDGE as f64;
            nodes.push(eval_sample(f, a + (c - a) * t, budget)?);
        }
    }
    nodes.push(nodes[0]); // close the loop

    // adaptive bisection until |Δarg| ≤ cap per segment
    let mut out: Vec<Sample> = Vec::with_capacity(2 * nodes.len());
    out.push(nodes[0]);
    for w in 1..nodes.len() {
        push_refined(f, nodes[w - 1], nodes[w], cap, 0, budget, &mut out)?;
    }
    Ok(out)
}

fn push_refined(
    f: &EvalFn,
    a: Sample,
    b: Sample,
    cap: f64,
    depth: usize,
    budget: &Budget,
    out: &mut Vec<Sample>,
) -> Result<(), RootError> {
    if depth >= 52 {
        out.push(b);
        return Ok(());
    }
    // A small wrapped increment can hide a fast full turn (aliasing), so a
    // segment is accepted only when its midpoint confirms the increment.
    let d = wrap_to_pi(b.arg - a.arg);
    let mid = eval_sample(f, (a.z + b.z) * 0.5, budget)?;
    let d1 = wrap_to_pi(mid.arg - a.arg);
    let d2 = wrap_to_pi(b.arg - mid.arg);
    let consistent = (d1 + d2 - d).abs() <= 1e-9;
    if consistent && d.abs() <= cap && d1.abs() <= cap && d2.abs() <= cap {
        out.push(mid);
        out.push(b);
        return Ok(());
    }
    push_refined(f, a, mid, cap, depth + 1, budget, out)?;
    push_refined(f, mid, b, cap, depth + 1, budget, out)
}

struct ContourResult {
    winding: i64,
    median_log: f64,
}

fn winding_on_contour(
    f: &EvalFn,
    b: &SearchBox,
    quad_tol: f64,
    budget: &Budget,
) -> Result<ContourResult, RootError> {
    let mut cap = PI / 2.0;
    for _ in 0..3 {
        let samples = contour_samples(f, b, cap, budget)?;
        let mut logs: Vec<f64> = samples.iter().map(|s| s.log_abs).collect();
        logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = logs[logs.len() / 2];
        let min = logs[0];
        if min - median < PROXIMITY_LOG_GAP {
            return Err(RootError::ContourProximity { gap: min - median });
        }
        let total: f64 = samples.windows(2).map(|w| wrap_to_pi(w[1].arg - w[0].arg)).sum();
        let turns = total / (2.0 * PI);
        let rounded = turns.round();
        if (turns - rounded).abs() <= quad_tol {
            return Ok(ContourResult {
                winding: rounded as i64,
                median_log: median,
            });
        }
        cap *= 0.5;
    }
    Err(RootError::WindingUnresolved { residual: f64::NAN })
}

/// Zero count (with multiplicity) of `f` inside the box, by continuous
/// argument tracking along the boundary.
///
/// Errors with [`RootError::ContourProximity`] when the sampled |f| falls
/// below 1e-12 of the contour median; callers jitter the box and retry.
pub fn winding_number(f: &EvalFn, b: &SearchBox, quad_tol: f64) -> Result<i64, RootError> {
    let budget = Budget::new(DEFAULT_BUDGET);
    winding_on_contour(f, b, quad_tol, &budget).map(|r| r.winding)
}

fn winding_with_jitter(
    f: &EvalFn,
    b: &SearchBox,
    budget: &Budget,
) -> Result<(SearchBox, ContourResult), RootError> {
    let mut cur = *b;
    let mut last_err = None;
    for _ in 0..=MAX_JITTER {
        match winding_on_contour(f, &cur, 0.25, budget) {
            Ok(r) => return Ok((cur, r)),
            Err(e @ (RootError::ContourProximity { .. } | RootError::WindingUnresolved { .. })) => {
                last_err = Some(e);
                cur = cur.expanded(JITTER_FACTOR);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("jitter loop ran"))
}

/// Damped Newton with a central-difference derivative. All three values per
/// iteration are rescaled to a common log-scale before differencing.
/// True when |f| at the candidate sits far below |f| a touch away — the
/// signature of an actual zero, as opposed to a mere descent into a region
/// where the function is exponentially small.
fn confirms_dip(f: &EvalFn, z: Complex64, log_fz: f64, budget: &Budget) -> Result<bool, RootError> {
    let delta = 1e-6 * (1.0 + z.norm());
    if !budget.spend(2) {
        return Err(RootError::BudgetExhausted { partial: vec![] });
    }
    let a = f(z + delta).map_err(RootError::Eval)?.log_abs();
    let b = f(z - delta).map_err(RootError::Eval)?.log_abs();
    Ok(log_fz <= a.min(b) - 50.0f64.ln())
}

fn newton_refine(
    f: &EvalFn,
    start: Complex64,
    local_log_scale: f64,
    tol: f64,
    bounds: &SearchBox,
    budget: &Budget,
) -> Result<Option<(Complex64, f64)>, RootError> {
    let target = tol.ln() + local_log_scale;
    let mut z = start;
    let mut fz = {
        if !budget.spend(1) {
            return Err(RootError::BudgetExhausted { partial: vec![] });
        }
        f(z).map_err(RootError::Eval)?
    };
    // Polish past the residual target all the way to the improvement floor:
    // shallow zeros (small |f'|) otherwise stop many decades of λ short.
    for _ in 0..120 {
        let delta = 1e-6 * (1.0 + z.norm());
        if !budget.spend(2) {
            return Err(RootError::BudgetExhausted { partial: vec![] });
        }
        let fp = f(z + delta).map_err(RootError::Eval)?;
        let fm = f(z - delta).map_err(RootError::Eval)?;
        let common = fz.log_scale.max(fp.log_scale).max(fm.log_scale);
        let vp = fp.with_scale(common);
        let vm = fm.with_scale(common);
        let v0 = fz.with_scale(common);
        let deriv = (vp - vm) / (2.0 * delta);
        if deriv.norm() == 0.0 {
            break;
        }
        let mut step = v0 / deriv;
        if !step.re.is_finite() || !step.im.is_finite() {
            // the numerical derivative underflowed relative to the value
            break;
        }
        // keep iterates from flying far outside the search region
        let max_step = 2.0 * bounds.diameter().max(1e-12);
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let step_size = step.norm();
        let mut improved = false;
        for _ in 0..8 {
            let cand = z - step;
            if !budget.spend(1) {
                return Err(RootError::BudgetExhausted { partial: vec![] });
            }
            let fc = f(cand).map_err(RootError::Eval)?;
            if fc.log_abs() < fz.log_abs() {
                z = cand;
                fz = fc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || step_size < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if fz.log_abs() <= target && confirms_dip(f, z, fz.log_abs(), budget)? {
        Ok(Some((z, (fz.log_abs() - local_log_scale).exp())))
    } else {
        Ok(None)
    }
}

/// Locate all zeros of `f` in the box by recursive quadrisection and Newton
/// refinement. Winding-1 boxes are refined; clusters that cannot be split
/// above `min_size` are reported at the box centre with their multiplicity.
pub fn find_roots(f: &EvalFn, b: &SearchBox, tol: f64) -> Result<Vec<Located>, RootError> {
    let budget = Budget::new(DEFAULT_BUDGET);
    let mut found: Vec<Located> = Vec::new();
    let run = find_roots_inner(f, b, tol, &budget, &mut found);
    match run {
        Ok(()) => {
            let mut out = dedup_located(found, dedup_radius(tol));
            out.retain(|r| b.expanded(1.06).contains(r.lambda));
            Ok(out)
        }
        Err(RootError::BudgetExhausted { .. }) => Err(RootError::BudgetExhausted {
            partial: dedup_located(found, dedup_radius(tol)),
        }),
        Err(e) => Err(e),
    }
}

fn dedup_radius(tol: f64) -> f64 {
    10.0 * tol
}

fn find_roots_inner(
    f: &EvalFn,
    top: &SearchBox,
    tol: f64,
    budget: &Budget,
    found: &mut Vec<Located>,
) -> Result<(), RootError> {
    let mut stack = vec![*top];
    while let Some(b) = stack.pop() {
        let (b, contour) = winding_with_jitter(f, &b, budget)?;
        if contour.winding < 0 {
            return Err(RootError::WindingUnresolved {
                residual: contour.winding as f64,
            });
        }
        if contour.winding == 0 {
            continue;
        }
        let small = b.diameter() <= b.min_size;
        if contour.winding == 1 || small {
            let refined = newton_refine(f, b.center(), contour.median_log, tol, &b, budget)?
                // a refinement that leaves the box chased a neighbouring
                // root; subdivide instead (b already carries any jitter
                // expansion, so edge roots stay acceptable)
                .filter(|(z, _)| b.contains(*z) || small);
            if let Some((z, residual)) = refined {
                found.push(Located {
                    lambda: z,
                    residual,
                    winding: contour.winding as u32,
                });
                continue;
            }
            if small {
                // cluster or refinement failure at the size floor: report the
                // centre with the enclosed multiplicity
                let fz = if budget.spend(1) {
                    f(b.center()).map_err(RootError::Eval)?
                } else {
                    return Err(RootError::BudgetExhausted { partial: vec![] });
                };
                found.push(Located {
                    lambda: b.center(),
                    residual: (fz.log_abs() - contour.median_log).exp(),
                    winding: contour.winding as u32,
                });
                continue;
            }
        }
        // push in fixed order for a deterministic traversal
        for child in b.quadrisect().into_iter().rev() {
            stack.push(child);
        }
    }
    Ok(())
}

fn dedup_located(mut roots: Vec<Located>, radius: f64) -> Vec<Located> {
    roots.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    let mut out: Vec<Located> = Vec::with_capacity(roots.len());
    for r in roots {
        if let Some(last) = out
            .iter_mut()
            .find(|q| (q.lambda - r.lambda).norm() <= radius)
        {
            if r.residual < last.residual {
                *last = r;
            }
        } else {
            out.push(r);
        }
    }
    out
}

/// Default per-box mode ceiling: modes beyond the classical turning point of
/// the largest |λ| in the box contribute no zeros, with margin for complex λ.
pub fn default_ell_max(pair: &MediumPair, b: &SearchBox) -> u32 {
    let corners = [
        Complex64::new(b.re.0, b.im.0),
        Complex64::new(b.re.1, b.im.0),
        Complex64::new(b.re.0, b.im.1),
        Complex64::new(b.re.1, b.im.1),
    ];
    let lam_max = corners.iter().map(|c| c.norm()).fold(0.0, f64::max);
    (1.5 * lam_max * pair.sup_sqrt_index()).ceil() as u32 + 10
}

/// Transmission spectrum of a medium pair in a search window: the union over
/// ℓ ≤ ell_max of the zeros of W_ℓ, deduplicated across modes.
///
/// Modes run in parallel; the merge is ordered by ℓ, so the output does not
/// depend on the worker count. Per-mode failures are reported alongside the
/// roots of the modes that succeeded.
pub fn itp_spectrum(
    pair: &MediumPair,
    b: &SearchBox,
    ell_max: u32,
    tol: f64,
) -> Result<Spectrum, RootError> {
    if pair.classify() == CaseTag::Degenerate {
        return Err(RootError::DegeneratePair);
    }
    // Drive the ODE two decades below the refinement tolerance: the λ-error
    // of a refined zero is the evaluation noise divided by |W'|, which for
    // the shallow zeros born near the classical turning point costs one to
    // two decades.
    let ode_tol = (tol * 1e-2).max(1e-13);
    let per_mode: Vec<(u32, Result<Vec<Located>, RootError>)> = (0..=ell_max)
        .into_par_iter()
        .map(|ell| {
            let f = |lambda: Complex64| -> Result<ScaledComplex, String> {
                itp_characteristic(lambda, ell, pair, ode_tol)
                    .map_err(|e: SolveError| e.to_string())
            };
            (ell, find_roots(&f, b, tol))
        })
        .collect();

    let mut roots: Vec<Root> = Vec::new();
    let mut mode_failures = Vec::new();
    let radius = dedup_radius(tol);
    for (ell, res) in per_mode {
        match res {
            Ok(located) => {
                for loc in located {
                    if let Some(existing) = roots
                        .iter_mut()
                        .find(|r| (r.lambda - loc.lambda).norm() <= radius)
                    {
                        existing.contributing.push(ell);
                        if loc.residual < existing.residual {
                            existing.lambda = loc.lambda;
                            existing.residual = loc.residual;
                            existing.ell = ell;
                            existing.winding = loc.winding;
                        }
                    } else {
                        roots.push(Root {
                            lambda: loc.lambda,
                            ell,
                            residual: loc.residual,
                            winding: loc.winding,
                            contributing: vec![ell],
                        });
                    }
                }
            }
            Err(e) => mode_failures.push((ell, e.to_string())),
        }
    }
    roots.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    Ok(Spectrum {
        roots,
        mode_failures,
    })
}
