//! Quadrature: adaptive Gauss-Kronrod, power-law tails and Fourier integrals
//! of densities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::series::TailExpansion;
use crate::specfun::Complex;

/// Default evaluation budget of one adaptive integration.
pub const DEFAULT_BUDGET: usize = 100_000;

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

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult<T = f64> {
    pub value: T,
    pub err_estimate: f64,
    pub evaluations: usize,
}

/// Absolute/relative targets and evaluation budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub budget: usize,
}

impl QuadConfig {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn relative(tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: tol,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Nodes and weights of the 15-point Kronrod rule on `[a, b]`.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * h); 15];
    for j in 0..7 {
        out[2 * j] = (c - h * XGK[j], WGK[j] * h);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h);
    }
    out
}

/// One Kronrod panel: `(value, error, ∫|f|)`.
fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.magnitude() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        kron = kron + s * WGK[j];
        abs += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let err = (kron - gauss).magnitude() * h.abs();
    let abs = abs * h.abs();
    // floor for rounding in the rule itself
    let err = err.max(50.0 * f64::EPSILON * abs);
    (kron * h, err, abs)
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive bisection with the 7/15-point Gauss-Kronrod pair.
pub fn integrate_with<T: Integrand>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    cfg: QuadConfig,
) -> Result<IntegralResult<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration bounds must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegralResult {
            value: T::zero(),
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate_with(f, b, a, cfg)?;
        return Ok(IntegralResult {
            value: r.value * -1.0,
            ..r
        });
    }
    let (v, e, _) = gk15(&f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    // pieces too narrow to split keep their error here
    let mut frozen_err = 0.0;
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err + frozen_err <= target {
            break;
        }
        let Some(piece) = heap.pop() else { break };
        let mid = 0.5 * (piece.a + piece.b);
        if mid <= piece.a || mid >= piece.b || (piece.b - piece.a) < 1e-14 * mid.abs() {
            frozen_err += piece.err;
            total_err -= piece.err;
            continue;
        }
        if evals + 30 > cfg.budget {
            return Err(Error::Budget(cfg.budget));
        }
        let (v1, e1, _) = gk15(&f, piece.a, mid);
        let (v2, e2, _) = gk15(&f, mid, piece.b);
        evals += 30;
        total = total - piece.value + v1 + v2;
        total_err += e1 + e2 - piece.err;
        heap.push(Piece { a: piece.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: piece.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated rounding of the running totals
    let mut value = T::zero();
    let mut err = frozen_err;
    for p in heap.iter() {
        value = value + p.value;
        err += p.err;
    }
    if heap.is_empty() {
        value = total;
    }
    Ok(IntegralResult {
        value,
        err_estimate: err,
        evaluations: evals,
    })
}

/// `∫_a^b f` to absolute tolerance `tol` with the default budget.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<IntegralResult> {
    integrate_with(f, a, b, QuadConfig::absolute(tol))
}

/// `∫_a^∞ f` for `f ~ C x^(-α-1)`, via `u = x^(-α)`.
pub fn integrate_tail_powerlaw(
    f: impl Fn(f64) -> f64,
    a: f64,
    alpha: f64,
    tol: f64,
) -> Result<IntegralResult> {
    tail_powerlaw_with(f, a, alpha, QuadConfig::absolute(tol))
}

pub fn tail_powerlaw_with(
    f: impl Fn(f64) -> f64,
    a: f64,
    alpha: f64,
    cfg: QuadConfig,
) -> Result<IntegralResult> {
    if !(a > 0.0 && alpha > 0.0) {
        return Err(Error::domain(format!(
            "power-law tail needs a > 0 and alpha > 0, got a={a}, alpha={alpha}"
        )));
    }
    let umax = a.powf(-alpha);
    let inv = 1.0 / alpha;
    let g = |u: f64| {
        let x = u.powf(-inv);
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * x / u * inv
        }
    };
    integrate_with(g, 0.0, umax, cfg)
}

/// One half-line `[0, inf)` of a density for Fourier integration.
pub struct HalfLine<'a> {
    pub density: &'a (dyn Fn(f64) -> f64 + Sync),
    /// Left end of the support on this side (0 unless there is a gap).
    pub lower: f64,
    /// Right end of the support (infinite for heavy tails).
    pub upper: f64,
    /// Convergent tail expansion; required when `upper` is infinite.
    pub tail: Option<&'a TailExpansion>,
    /// Interior points where the density is not smooth.
    pub kinks: Vec<f64>,
}

/// `∫_0^∞ e^{izx} ψ(x) dx` for `z > 0`.
fn half_fourier(h: &HalfLine<'_>, z: f64, tol: f64) -> Result<IntegralResult<Complex>> {
    let end = if h.upper.is_finite() {
        h.upper
    } else {
        let onset = h.tail.map_or(1.0, |t| t.onset());
        (4.0 * onset).max(40.0 / z).max(2.0 * h.lower)
    };
    let mut breaks = vec![h.lower];
    let step = PI / z;
    let mut x = (h.lower / step).floor() * step + step;
    while x < end {
        breaks.push(x);
        x += step;
    }
    breaks.push(end);
    breaks.extend(h.kinks.iter().copied().filter(|&k| k > h.lower && k < end));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let n_panels = (breaks.len() - 1).max(1);
    let cfg = QuadConfig {
        abs_tol: 0.5 * tol / n_panels as f64,
        rel_tol: 0.0,
        budget: DEFAULT_BUDGET,
    };
    let f = |x: f64| {
        let d = (h.density)(x);
        Complex::new(d * (z * x).cos(), d * (z * x).sin())
    };
    let mut value = Complex::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        let r = integrate_with(f, w[0], w[1], cfg)?;
        value += r.value;
        err += r.err_estimate;
        evals += r.evaluations;
    }
    if !h.upper.is_finite() {
        let tail = h
            .tail
            .ok_or_else(|| Error::domain("heavy-tailed half-line without a tail model"))?;
        let (v, e) = ibp_tail(tail, end, z);
        value += v;
        err += e;
    }
    Ok(IntegralResult {
        value,
        err_estimate: err,
        evaluations: evals,
    })
}

/// `∫_X^∞ e^{izx} g(x) dx = -e^{izX} Σ_k (-1)^k g^(k)(X) / (iz)^(k+1)`,
/// summed until the terms stop decreasing.
fn ibp_tail(tail: &TailExpansion, x0: f64, z: f64) -> (Complex, f64) {
    if tail.is_zero() {
        return (Complex::new(0.0, 0.0), 0.0);
    }
    let iz = Complex::new(0.0, z);
    let mut sum = Complex::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    let mut inv_pow = iz.inv();
    for k in 0..30u32 {
        let g = tail.derivative(x0, k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = inv_pow * (sign * g);
        let m = term.norm();
        if m > prev {
            break;
        }
        sum += term;
        last = m;
        prev = m;
        if m < 1e-18 {
            break;
        }
        inv_pow /= iz;
    }
    let phase = Complex::new((z * x0).cos(), (z * x0).sin());
    (-phase * sum, last)
}

/// `∫ e^{izx} ψ(x) dx` over the real line, `ψ` given by its two halves
/// (`left` holds `x -> ψ(-x)`).
pub fn fourier_integral(
    right: &HalfLine<'_>,
    left: &HalfLine<'_>,
    z: f64,
    tol: f64,
) -> Result<IntegralResult<Complex>> {
    if !z.is_finite() {
        return Err(Error::domain(format!("fourier_integral needs finite z, got {z}")));
    }
    if z == 0.0 {
        let r = half_mass(right, tol)?;
        let l = half_mass(left, tol)?;
        return Ok(IntegralResult {
            value: Complex::new(r.value + l.value, 0.0),
            err_estimate: r.err_estimate + l.err_estimate,
            evaluations: r.evaluations + l.evaluations,
        });
    }
    let za = z.abs();
    let r = half_fourier(right, za, 0.5 * tol)?;
    let l = half_fourier(left, za, 0.5 * tol)?;
    // ψ(-x) against e^{-izx} is the conjugate transform of the left half
    let v = r.value + l.value.conj();
    Ok(IntegralResult {
        value: if z > 0.0 { v } else { v.conj() },
        err_estimate: r.err_estimate + l.err_estimate,
        evaluations: r.evaluations + l.evaluations,
    })
}

/// Mass of one half-line.
pub fn half_mass(h: &HalfLine<'_>, tol: f64) -> Result<IntegralResult> {
    let cfg = QuadConfig::absolute(0.5 * tol);
    let end = if h.upper.is_finite() {
        h.upper
    } else {
        let onset = h.tail.map_or(1.0, |t| t.onset());
        (2.0 * onset).max(h.lower * 1.5).max(1e-300)
    };
    let mut breaks = vec![h.lower];
    breaks.extend(h.kinks.iter().copied().filter(|&k| k > h.lower && k < end));
    breaks.push(end);
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        let r = integrate_with(|x| (h.density)(x), w[0], w[1], cfg)?;
        value += r.value;
        err += r.err_estimate;
        evals += r.evaluations;
    }
    if !h.upper.is_finite() {
        let tail = h
            .tail
            .ok_or_else(|| Error::domain("heavy-tailed half-line without a tail model"))?;
        value += tail.upper_mass(end);
    }
    Ok(IntegralResult {
        value,
        err_estimate: err,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_integrals() {
        let r = integrate_adaptive(|x| x, 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        let r = integrate_adaptive(|x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI), -2.0, 2.0, 1e-12)
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_adaptive(|_| 0.0, 0.0, 3.0, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        let r = integrate_adaptive(|x| x, 1.0, 0.0, 1e-14).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = QuadConfig {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            budget: 200,
        };
        let r = integrate_with(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, cfg);
        assert!(matches!(r, Err(Error::Budget(200))));
    }

    #[test]
    fn error_estimates_are_conservative() {
        type F = fn(f64) -> f64;
        let cases: [(F, f64, f64, f64); 20] = [
            (|x| x * x, 0.0, 1.0, 1.0 / 3.0),
            (|x| x.exp(), 0.0, 1.0, std::f64::consts::E - 1.0),
            (|x| x.sin(), 0.0, PI, 2.0),
            (|x| 1.0 / (1.0 + x * x), -1.0, 1.0, PI / 2.0),
            (|x| x.sqrt(), 0.0, 1.0, 2.0 / 3.0),
            (|x| x.ln(), 1e-300, 1.0, -1.0),
            (|x| 1.0 / x.sqrt(), 1e-300, 1.0, 2.0),
            (|x| (-x * x).exp(), -10.0, 10.0, 1.772_453_850_905_516),
            (|x| x.cos().powi(2), 0.0, 2.0 * PI, PI),
            (|x| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0, 0.4 * 5f64.atan()),
            (|x| x.powi(7) - 3.0 * x.powi(3), -1.0, 2.0, 255.0 / 8.0 - 45.0 / 4.0),
            (|x| (1.0 - x * x).sqrt(), -1.0, 1.0, PI / 2.0),
            (|x| x.abs(), -1.0, 2.0, 2.5),
            (|x| (10.0 * x).sin(), 0.0, 1.0, (1.0 - (10.0f64).cos()) / 10.0),
            (|x| x * (-x).exp(), 0.0, 50.0, 1.0 - 51.0 * (-50.0f64).exp()),
            (|x| 1.0 / x, 1.0, 100.0, 4.605_170_185_988_092),
            (|x| (x * x).cos(), 0.0, 3.0, 0.702_863_557_730_269),
            (|x| x.powf(-0.25), 1e-300, 1.0, 4.0 / 3.0),
            (|x| if x < 0.3 { 1.0 } else { 2.0 }, 0.0, 1.0, 1.7),
            (|x| x.powf(1.5) * (1.0 - x).sqrt(), 0.0, 1.0, PI / 16.0),
        ];
        for (i, (f, a, b, exact)) in cases.iter().enumerate() {
            let r = integrate_adaptive(f, *a, *b, 1e-10).unwrap();
            let err = (r.value - exact).abs();
            assert!(
                err <= r.err_estimate.max(4.0 * f64::EPSILON * exact.abs()),
                "case {i}: err {err:e} > estimate {:e}",
                r.err_estimate
            );
            assert!(err <= 1e-9, "case {i}: err {err:e}");
        }
    }

    #[test]
    fn power_law_tail() {
        let r = integrate_tail_powerlaw(|x| x.powf(-1.5), 1.0, 0.5, 1e-13).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate_tail_powerlaw(|_| 0.0, 1.0, 0.5, 1e-13).unwrap();
        assert_eq!(r.value, 0.0);
        // x^-2.2 + x^-3.4 has the expansion structure of an alpha=1.2 tail
        let r = integrate_tail_powerlaw(|x| x.powf(-2.2) + x.powf(-3.4), 2.0, 1.2, 1e-13).unwrap();
        let exact = 2f64.powf(-1.2) / 1.2 + 2f64.powf(-2.4) / 2.4;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn fourier_of_semicircle() {
        let sc = |x: f64| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI);
        let half = HalfLine {
            density: &sc,
            lower: 0.0,
            upper: 2.0,
            tail: None,
            kinks: vec![],
        };
        let r = fourier_integral(&half, &half, 1.0, 1e-12).unwrap();
        assert!((r.value.re - 0.576_724_807_756_873_4).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-12);
        let m = fourier_integral(&half, &half, 0.0, 1e-12).unwrap();
        assert!((m.value.re - 1.0).abs() < 1e-10);
        let neg = fourier_integral(&half, &half, -1.0, 1e-12).unwrap();
        assert!((neg.value - r.value.conj()).norm() < 1e-14);
    }
}
