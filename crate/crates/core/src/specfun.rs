//! Scalar special-function kernels.
//!
//! Gamma-type quantities are always produced through `ln Γ` with the sign
//! tracked separately, so the series coefficients stay finite for thousands of
//! terms. `sin(πx)` and `cos(πx)` reduce the argument before multiplying by
//! π, which makes them exact at integers and half-integers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Minimum |z| at which the Stirling series is used directly.
const STIRLING_MIN: f64 = 10.0;

/// B_{2k} / (2k (2k - 1)) for k = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `sin(πx)` with the reduction performed on `x`.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    // fmod is exact
    let mut r = x.abs() % 2.0;
    let mut s = sign;
    if r >= 1.0 {
        r -= 1.0;
        s = -s;
    }
    if r > 0.5 {
        r = 1.0 - r;
    }
    let v = if r <= 0.25 {
        (PI * r).sin()
    } else {
        (PI * (0.5 - r)).cos()
    };
    s * v
}

/// `cos(πx)` with the reduction performed on `x`.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let mut r = x.abs() % 2.0;
    let mut s = 1.0;
    if r >= 1.0 {
        r -= 1.0;
        s = -s;
    }
    if r > 0.5 {
        r = 1.0 - r;
        s = -s;
    }
    if r == 0.5 {
        return 0.0;
    }
    let v = if r <= 0.25 {
        (PI * r).cos()
    } else {
        (PI * (0.5 - r)).sin()
    };
    s * v
}

/// `sin(πz)` for complex `z`.
pub fn sin_pi_complex(z: Complex) -> Complex {
    let (sh, ch) = ((PI * z.im).sinh(), (PI * z.im).cosh());
    Complex::new(sin_pi(z.re) * ch, cos_pi(z.re) * sh)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn stirling_complex(z: Complex) -> Complex {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut corr = Complex::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING_COEFFS {
        corr += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + corr
}

fn factorial_gamma(x: f64) -> Option<f64> {
    if x >= 1.0 && x <= 171.0 && x == x.floor() {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        Some(acc)
    } else {
        None
    }
}

/// `(ln|Γ(x)|, sign Γ(x))`. At the poles returns `(+∞, 1)`.
pub fn ln_gamma_sign(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, 1.0);
    }
    if is_nonpositive_integer(x) {
        return (f64::INFINITY, 1.0);
    }
    let (lg, s) = libm::lgamma_r(x);
    (lg, if s < 0 { -1.0 } else { 1.0 })
}

/// `ln|Γ(x)|` for real `x`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_sign(x).0
}

/// Γ(x) for real `x`; `±∞` at the poles.
pub fn gamma(x: f64) -> f64 {
    if let Some(v) = factorial_gamma(x) {
        return v;
    }
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x.abs() < 170.0 {
        return libm::tgamma(x);
    }
    let (lg, s) = ln_gamma_sign(x);
    s * lg.exp()
}

/// 1/Γ(x). Entire: exactly zero at 0, -1, -2, ...
pub fn rec_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if let Some(v) = factorial_gamma(x) {
        return 1.0 / v;
    }
    if x.abs() < 170.0 {
        return 1.0 / libm::tgamma(x);
    }
    let (lg, s) = ln_gamma_sign(x);
    s * (-lg).exp()
}

/// Principal value of `ln sin(πz)`, stable for large `|Im z|`.
fn ln_sin_pi(z: Complex) -> Complex {
    if z.im.abs() < 20.0 {
        return sin_pi_complex(z).ln();
    }
    // sin(πz) = (±i/2) e^{∓iπz} (1 - e^{±2iπz}) for Im z ≷ 0
    let sgn = z.im.signum();
    let xr = z.re % 2.0;
    let tiny = Complex::new(0.0, sgn * 2.0 * PI * z.re).exp() * (-2.0 * PI * z.im.abs()).exp();
    let re = PI * z.im.abs() - std::f64::consts::LN_2;
    let im = sgn * (0.5 * PI - PI * xr);
    let base = Complex::new(re, im) + (Complex::new(1.0, 0.0) - tiny).ln();
    let two_pi = 2.0 * PI;
    let mut t = base.im.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    Complex::new(base.re, t)
}

/// Analytic log-gamma (branch cut on the non-positive real axis).
pub fn log_gamma(z: Complex) -> Result<Complex> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain(format!("log_gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::Pole(z.re));
    }
    if z.im == 0.0 && z.re > 0.0 {
        return Ok(Complex::new(ln_gamma(z.re), 0.0));
    }
    if z.re < 0.5 {
        let offset = (2.0 * PI).copysign(z.im) * (0.5 * z.re + 0.25).floor();
        let rest = log_gamma(Complex::new(1.0, 0.0) - z)?;
        return Ok(Complex::new(LN_PI, offset) - ln_sin_pi(z) - rest);
    }
    let mut w = z;
    let mut shift = Complex::new(0.0, 0.0);
    while w.norm() < STIRLING_MIN {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling_complex(w) - shift)
}

/// Γ(z) for complex `z`.
pub fn gamma_complex(z: Complex) -> Result<Complex> {
    Ok(log_gamma(z)?.exp())
}

/// 1/Γ(z) for complex `z`; zero at the poles of Γ.
pub fn rec_gamma_complex(z: Complex) -> Complex {
    match log_gamma(z) {
        Ok(lg) => (-lg).exp(),
        Err(_) => Complex::new(0.0, 0.0),
    }
}
