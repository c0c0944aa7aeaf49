//! Quadrature and one-dimensional maximization used across the crate.
//!
//! * [`adaptive`] — globally adaptive Gauss–Kronrod (7/15) on a finite
//!   interval, with optional user breakpoints.
//! * [`tanh_sinh`] — double-exponential rule for integrands with algebraic
//!   endpoint singularities.
//! * [`ln_integral_exp`] — `ln ∫ exp(g(y)) dy` for sharply peaked integrands
//!   whose magnitude would overflow `f64`.
//! * [`golden_max`] / [`maximize_log_scan`] — bracketing maximizers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes and weights of the composite 15-point Kronrod rule with `panels`
/// equal panels on `[a, b]`, for integrands evaluated many times.
pub fn composite_kronrod(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(15 * panels);
    for i in 0..panels {
        let c = a + (i as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in XGK.iter().zip(WGK) {
            out.push((c - half * x, half * w));
            if *x != 0.0 {
                out.push((c + half * x, half * w));
            }
        }
    }
    out
}

/// Requested accuracy: the estimate is accepted once the error bound drops
/// below `max(abs, rel · |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One Gauss–Kronrod 15-point panel; returns (integral, error estimate).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    if round_off > f64::MIN_POSITIVE {
        err = err.max(round_off);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Maximum number of panels [`adaptive`] will create.
pub const MAX_PANELS: usize = 4000;

/// Globally adaptive GK15 over `[a, b]`, starting from the panels delimited
/// by `breakpoints` (points outside `(a, b)` are ignored).
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let est = adaptive_best_effort(f, a, b, breakpoints, tol);
    if !est.value.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            requested: tol.target(1.0),
        });
    }
    if est.error > tol.target(est.value) {
        return Err(Error::Quadrature {
            achieved: est.error,
            requested: tol.target(est.value),
        });
    }
    Ok(est)
}

/// Like [`adaptive`] but returns the best estimate even when the requested
/// tolerance was not met; callers inspect `error` themselves.
pub fn adaptive_best_effort<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(lo);
    nodes.extend(cuts);
    nodes.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in nodes.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let budget = MAX_PANELS.max(2 * heap.len());
    let mut panels = heap.len();
    while total_err > tol.target(total) && panels < budget {
        let Some(worst) = heap.pop() else { break };
        if worst.error == 0.0 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-14 * (hi - lo) {
            // too narrow to split; freeze its contribution
            total_err -= worst.error;
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        panels += 1;
    }
    // resum to shed drift in the running totals
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Estimate {
        value: sign * value,
        error,
    }
}

/// Tanh–sinh quadrature on `[a, b]`. The integrand is never evaluated at the
/// endpoints themselves, so integrable endpoint singularities are fine.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Estimate> {
    use std::f64::consts::FRAC_PI_2;
    const T_MAX: f64 = 6.0;
    const MAX_LEVEL: u32 = 12;
    let width = b - a;
    let center = 0.5 * (a + b);
    let half = 0.5 * width;

    // contribution of abscissae t and −t
    let mut pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        if t == 0.0 {
            return w * f(center);
        }
        // distance from the nearer endpoint, free of cancellation
        let gap = width / (1.0 + (2.0 * u).exp());
        if gap <= 0.0 {
            return 0.0;
        }
        let xl = a + gap;
        let xr = b - gap;
        let mut s = 0.0;
        if xl > a {
            s += f(xl);
        }
        if xr < b {
            s += f(xr);
        }
        w * s
    };

    let mut h = 1.0;
    let mut sum = pair(0.0);
    let mut t = h;
    while t <= T_MAX {
        sum += pair(t);
        t += h;
    }
    let mut estimate = h * sum;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        let mut extra = 0.0;
        while t <= T_MAX {
            extra += pair(t);
            t += 2.0 * h;
        }
        sum += extra;
        let next = h * sum;
        error = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            break;
        }
        if level >= 3 && error <= rel_tol * estimate.abs() {
            return Ok(Estimate {
                value: estimate,
                error,
            });
        }
    }
    Err(Error::Quadrature {
        achieved: if estimate != 0.0 {
            error / estimate.abs()
        } else {
            error
        },
        requested: rel_tol,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > xtol * (1.0 + c.abs()) && iter < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximize `f(x)` for `x ∈ [lo, hi]` (both positive): a scan over `n`
/// log-spaced points followed by golden-section refinement in `ln x`
/// around the discrete argmax. Returns `(argmax, max)`.
pub fn maximize_log_scan<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
    xtol: f64,
) -> (f64, f64) {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let n = n.max(3);
    let step = (lhi - llo) / (n - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let v = f((llo + step * i as f64).exp());
        if v > best.1 {
            best = (i, v);
        }
    }
    let i = best.0;
    let a = llo + step * i.saturating_sub(1) as f64;
    let b = llo + step * (i + 1).min(n - 1) as f64;
    let (y, v) = golden_max(|y| f(y.exp()), a, b, xtol);
    if v >= best.1 {
        (y.exp(), v)
    } else {
        ((llo + step * i as f64).exp(), best.1)
    }
}

/// `ln ∫_{lo}^{hi} exp(g(y)) dy` for a log-integrand `g` that may be huge or
/// tiny in absolute terms. The integrand is scanned on `n_scan` points to
/// locate its mode and the region where it exceeds `exp(max − 60)`, which is
/// then integrated with [`adaptive`] using the scan points as breakpoints.
pub fn ln_integral_exp<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    n_scan: usize,
    rel_tol: f64,
) -> Result<f64> {
    let n = n_scan.max(8);
    let step = (hi - lo) / (n - 1) as f64;
    let ys: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = ys.iter().map(|&y| g(y)).collect();
    let gmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !gmax.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            requested: rel_tol,
        });
    }
    let cutoff = gmax - 60.0;
    let first = vals.iter().position(|&v| v > cutoff).unwrap_or(0);
    let last = vals.iter().rposition(|&v| v > cutoff).unwrap_or(n - 1);
    let a = ys[first.saturating_sub(1)];
    let b = ys[(last + 1).min(n - 1)];
    let est = adaptive(|y| (g(y) - gmax).exp(), a, b, &ys, Tolerance::rel(rel_tol))?;
    Ok(gmax + est.value.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let (v, _) = gk15(&mut |x: f64| x.powi(20), 0.0, 1.0);
        assert!((v - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3).powi(2));
        let exact = ((0.7f64) / 1e-2).atan() / 1e-2 + ((0.3f64) / 1e-2).atan() / 1e-2;
        let e = adaptive(f, 0.0, 1.0, &[], Tolerance::rel(1e-12)).unwrap();
        assert!((e.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_reversed_limits() {
        let e = adaptive(|x: f64| x.cos(), PI / 2.0, 0.0, &[], Tolerance::rel(1e-13)).unwrap();
        assert!((e.value + 1.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2 and ∫_0^1 ln x dx = −1
        let e = tanh_sinh(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() < 1e-11);
        let e = tanh_sinh(|x: f64| x.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn composite_rule_integrates_exponential() {
        let v: f64 = composite_kronrod(0.0, 3.0, 4)
            .iter()
            .map(|(x, w)| w * x.exp())
            .sum();
        assert!((v - 3f64.exp_m1()).abs() < 1e-13);
    }

    #[test]
    fn golden_finds_interior_max() {
        let (x, v) = golden_max(|x: f64| -(x - 0.37).powi(2) + 2.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.37).abs() < 1e-6 && (v - 2.0).abs() < 1e-12);
        let (x, _) = maximize_log_scan(|x: f64| x * (-x).exp(), 1e-3, 1e3, 50, 1e-12);
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn log_integral_of_huge_gaussian() {
        // ∫ exp(800 − (y−3)²·50) dy = exp(800)·sqrt(π/50)
        let ln_i = ln_integral_exp(
            |y| 800.0 - 50.0 * (y - 3.0).powi(2),
            -20.0,
            20.0,
            400,
            1e-12,
        )
        .unwrap();
        assert!((ln_i - (800.0 + 0.5 * (PI / 50.0).ln())).abs() < 1e-11);
    }
}
