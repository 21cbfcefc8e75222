//! Shared test oracles, independent of the library's ODE/contour machinery:
//! Bessel evaluations by backward recurrence and continued fractions, the
//! constant-coefficient characteristic determinant, and a direct scan of its
//! zeros in a box.

#![allow(dead_code)]

use num_complex::Complex64;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// J_0..J_{n_max} at complex argument: ascending series for small |w|,
/// Miller's backward recurrence with the normalisation J_0 + 2·Σ J_{2k} = 1
/// otherwise.
pub fn bessel_j_array(w: Complex64, n_max: usize) -> Vec<Complex64> {
    if w.norm() < 1.0 {
        return (0..=n_max).map(|n| bessel_j_series(w, n)).collect();
    }
    let start = (n_max.max(w.norm().ceil() as usize)) + 60;
    let mut f = vec![Complex64::new(0.0, 0.0); start + 2];
    f[start + 1] = Complex64::new(0.0, 0.0);
    f[start] = Complex64::new(1e-200, 0.0);
    for k in (1..=start).rev() {
        f[k - 1] = f[k] * (2.0 * k as f64) / w - f[k + 1];
        if f[k - 1].norm() > 1e250 {
            let scale = 1e-250;
            for item in f.iter_mut().skip(k - 1) {
                *item *= scale;
            }
        }
    }
    // bring the raw recurrence output to O(1) so the normalising division
    // cannot underflow (complex division squares the denominator modulus)
    let peak = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        let inv = 1.0 / peak;
        for item in f.iter_mut() {
            *item *= inv;
        }
    }
    // The classic normalisation J0 + 2·Σ J_{2k} = 1 cancels catastrophically
    // when the argument has a large imaginary part (I-type growth); there the
    // identity e^{∓iw} = J0 + 2·Σ (∓i)^k J_k sums same-sign terms instead.
    let i = Complex64::new(0.0, 1.0);
    let (mut norm, target) = if w.im > 0.5 {
        (f[0], (-i * w).exp())
    } else if w.im < -0.5 {
        (f[0], (i * w).exp())
    } else {
        (f[0], Complex64::new(1.0, 0.0))
    };
    if w.im.abs() > 0.5 {
        let step = if w.im > 0.5 { -i } else { i };
        let mut phase = Complex64::new(1.0, 0.0);
        for item in f.iter().take(start + 1).skip(1) {
            phase *= step;
            norm += phase * item * 2.0;
        }
    } else {
        let mut k = 2;
        while k <= start {
            norm += f[k] * 2.0;
            k += 2;
        }
    }
    f.truncate(n_max + 1);
    for item in f.iter_mut() {
        *item *= target / norm;
    }
    f
}

/// Ascending series, accurate without cancellation for |w| < 1.
fn bessel_j_series(w: Complex64, n: usize) -> Complex64 {
    let half = w * 0.5;
    // (w/2)^n / n!
    let mut lead = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        lead *= half / k as f64;
    }
    let mut term = lead;
    let mut sum = term;
    let h2 = half * half;
    for m in 1..40 {
        term *= -h2 / (m as f64 * (m + n) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-280) {
            break;
        }
    }
    sum
}

/// J_{ell+1}(w)/J_{ell}(w) by the standard continued fraction (modified
/// Lentz). Valid away from zeros of J_ell.
pub fn bessel_j_ratio(ell: u32, w: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-150, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..100_000 {
        let b = 2.0 * (ell as f64 + j as f64) / w;
        let a = if j == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        d = b + a * d;
        if d.norm() < 1e-150 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() < 1e-150 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 2e-15 {
            return f;
        }
    }
    f
}

/// I_ell'(x)/I_ell(x) for real x > 0 via the ratio continued fraction
/// I_{nu+1}/I_nu = 1/(2(nu+1)/x + 1/(2(nu+2)/x + …)).
pub fn bessel_i_log_derivative(ell: u32, x: f64) -> f64 {
    let tiny = 1e-150;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..100_000 {
        let b = 2.0 * (ell as f64 + j as f64) / x;
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 2e-15 {
            break;
        }
    }
    ell as f64 / x + f
}

/// Per-mode DtN eigenvalue of a constant medium from the Bessel ratio:
/// nu_ell = i·h·k·J_ell'(k)/J_ell(k), k = lambda·sqrt(n/c).
pub fn dtn_oracle_constant(ell: u32, h: f64, z: Complex64, c: f64, n: f64) -> Complex64 {
    let lambda = upper_sqrt(z) / h;
    let k = lambda * (n / c).sqrt();
    let ratio = bessel_j_ratio(ell, k); // J_{ell+1}/J_ell
    // J_ell'(k)/J_ell(k) = ell/k − J_{ell+1}/J_ell
    Complex64::new(0.0, h) * (Complex64::new(ell as f64, 0.0) - k * ratio)
}

pub fn upper_sqrt(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// Constant-coefficient characteristic determinant for dimension 2:
/// W_ell(lambda) = c1·k1·J'(k1)·J(k2) − c2·k2·J'(k2)·J(k1), k_j = s_j·lambda.
pub fn oracle_w(lambda: Complex64, ell: u32, s1: f64, s2: f64, c1: f64, c2: f64) -> Complex64 {
    let k1 = lambda * s1;
    let k2 = lambda * s2;
    let n = ell as usize + 1;
    let j1 = bessel_j_array(k1, n);
    let j2 = bessel_j_array(k2, n);
    let dj = |arr: &[Complex64], k: Complex64| -> Complex64 {
        if ell == 0 {
            -arr[1]
        } else {
            // J_ell' = J_{ell−1} − (ell/k)·J_ell
            arr[ell as usize - 1] - arr[ell as usize] * (ell as f64) / k
        }
    };
    let w1 = dj(&j1, k1);
    let w2 = dj(&j2, k2);
    k1 * w1 * j2[ell as usize] * c1 - k2 * w2 * j1[ell as usize] * c2
}

fn newton_polish(
    f: &dyn Fn(Complex64) -> Complex64,
    mut z: Complex64,
    scale: f64,
) -> Option<Complex64> {
    for _ in 0..60 {
        let fz = f(z);
        let d = 1e-7 * (1.0 + z.norm());
        let df = (f(z + d) - f(z - d)) / (2.0 * d);
        if df.norm() == 0.0 {
            return None;
        }
        let step = fz / df;
        z -= step;
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            let res = f(z).norm();
            return if res <= 1e-9 * scale { Some(z) } else { None };
        }
    }
    None
}

/// All zeros of the constant-pair characteristic of one mode inside
/// [re0, re1] × [−im1, im1]: a fine real-axis scan (the determinant is real
/// there) plus a complex-strip minima scan, Newton-polished, conjugates
/// added by symmetry.
pub fn oracle_mode_roots(
    ell: u32,
    re_range: (f64, f64),
    im_max: f64,
    s1: f64,
    s2: f64,
    c1: f64,
    c2: f64,
) -> Vec<Complex64> {
    let f = |z: Complex64| oracle_w(z, ell, s1, s2, c1, c2);
    let mut roots: Vec<Complex64> = Vec::new();
    let push = |z: Complex64, roots: &mut Vec<Complex64>| {
        if z.re < re_range.0 - 1e-9
            || z.re > re_range.1 + 1e-9
            || z.im.abs() > im_max + 1e-9
        {
            return;
        }
        if !roots.iter().any(|r| (r - z).norm() < 1e-6) {
            roots.push(z);
        }
    };

    // typical magnitude for residual thresholds
    let mut scale: f64 = 0.0;
    let n_scan = 4000usize;
    let vals: Vec<f64> = (0..=n_scan)
        .map(|i| {
            let x = re_range.0 + (re_range.1 - re_range.0) * i as f64 / n_scan as f64;
            let v = f(c64(x, 0.0)).re;
            scale = scale.max(v.abs());
            v
        })
        .collect();

    // real-axis sign changes, bisected then polished
    for i in 0..n_scan {
        if vals[i] == 0.0 || vals[i].signum() == vals[i + 1].signum() {
            continue;
        }
        let mut a = re_range.0 + (re_range.1 - re_range.0) * i as f64 / n_scan as f64;
        let mut b = re_range.0 + (re_range.1 - re_range.0) * (i + 1) as f64 / n_scan as f64;
        let mut fa = vals[i];
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            let fm = f(c64(m, 0.0)).re;
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa.signum() == fm.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let cand = c64(0.5 * (a + b), 0.0);
        if let Some(z) = newton_polish(&f, cand, scale) {
            push(c64(z.re, 0.0), &mut roots); // real root stays real by symmetry
        }
    }

    // complex-strip minima of |W| in the open upper strip
    if im_max > 0.0 {
        let n_re = 560usize;
        let n_im = 40usize;
        let grid: Vec<Vec<f64>> = (0..=n_im)
            .map(|q| {
                let y = im_max * (q as f64 + 0.5) / (n_im as f64 + 0.5);
                (0..=n_re)
                    .map(|i| {
                        let x = re_range.0 + (re_range.1 - re_range.0) * i as f64 / n_re as f64;
                        f(c64(x, y)).norm()
                    })
                    .collect()
            })
            .collect();
        for q in 0..=n_im {
            for i in 0..=n_re {
                let v = grid[q][i];
                let mut is_min = true;
                for dq in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (qq, ii) = (q as i64 + dq, i as i64 + di);
                        if qq < 0 || qq > n_im as i64 || ii < 0 || ii > n_re as i64 {
                            continue;
                        }
                        if grid[qq as usize][ii as usize] < v {
                            is_min = false;
                        }
                    }
                }
                if !is_min || v > 0.5 * scale {
                    continue;
                }
                let x = re_range.0 + (re_range.1 - re_range.0) * i as f64 / n_re as f64;
                let y = im_max * (q as f64 + 0.5) / (n_im as f64 + 0.5);
                if let Some(z) = newton_polish(&f, c64(x, y), scale) {
                    if z.im.abs() > 1e-9 {
                        push(z, &mut roots);
                        push(z.conj(), &mut roots);
                    } else {
                        push(c64(z.re, 0.0), &mut roots);
                    }
                }
            }
        }
    }

    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    roots
}

/// Union of mode roots over ell ≤ ell_max, deduplicated with the matching
/// radius used by the library spectrum search.
pub fn oracle_spectrum(
    ell_max: u32,
    re_range: (f64, f64),
    im_max: f64,
    s1: f64,
    s2: f64,
    c1: f64,
    c2: f64,
    dedup: f64,
) -> Vec<(Complex64, Vec<u32>)> {
    let mut out: Vec<(Complex64, Vec<u32>)> = Vec::new();
    for ell in 0..=ell_max {
        for z in oracle_mode_roots(ell, re_range, im_max, s1, s2, c1, c2) {
            if let Some(entry) = out.iter_mut().find(|(r, _)| (*r - z).norm() <= dedup) {
                entry.1.push(ell);
            } else {
                out.push((z, vec![ell]));
            }
        }
    }
    out.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
    out
}

/// Least-squares slope of log y against log x (test-local convenience).
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn oracle_bessel_self_checks() {
    // tabulated J0, J1 at 1
    let j = bessel_j_array(c64(1.0, 0.0), 2);
    assert!((j[0].re - 0.7651976865579666).abs() < 1e-13);
    assert!((j[1].re - 0.4400505857449335).abs() < 1e-13);
    assert!(j[0].im.abs() < 1e-15);

    // CF ratio consistent with the array
    let r = bessel_j_ratio(0, c64(1.0, 0.0));
    assert!((r - j[1] / j[0]).norm() < 1e-12);

    // pure-imaginary argument reduces to I-Bessel: J1(ix)/J0(ix) = i·I1/I0
    let x = 20.0;
    let arr = bessel_j_array(c64(0.0, x), 1);
    let i_ratio = bessel_i_log_derivative(0, x); // = I1/I0
    assert!(((arr[1] / arr[0]).im - i_ratio).abs() < 1e-12);

    // recurrence consistency at complex argument
    let w = c64(3.0, 1.5);
    let a = bessel_j_array(w, 6);
    for k in 1..5 {
        let lhs = a[k - 1] + a[k + 1];
        let rhs = a[k] * (2.0 * k as f64) / w;
        assert!((lhs - rhs).norm() < 1e-12 * a[k].norm().max(1e-30));
    }
}
