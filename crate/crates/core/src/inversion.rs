//! Density oracle independent of the series.
//!
//! The Cauchy transform `G` maps `(0, inf)` onto a curve in the lower half
//! plane. In polar form `w = r e^{-iθ}` the curve is
//!
//! ```text
//! r(θ) = (sin θ / sin((1 - αρ)π + (α - 1)θ))^(1/α),   θ in (0, πρ)
//! ```
//!
//! and its real-axis preimage is `x = 1/w - e^{iπαρ} w^(α-1)`. The map is
//! strictly decreasing in `θ`, so `x -> θ` is found by bisection and the
//! density read off as `-Im(w)/π = r sin θ / π`.
//!
//! Internally the angle is carried as `t = θ/π` so that the trigonometric
//! reductions are exact.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::FreeStableParams;
use crate::specfun::{cos_pi, sin_pi, Complex};

const MAX_ITER: usize = 200;
const T_FLOOR: f64 = 1e-300;

/// A point on the image curve of the positive half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Angle in radians, `w = r e^{-iθ}`.
    pub theta: f64,
    pub r: f64,
    /// Value of the Cauchy transform at `x`.
    pub w: Complex,
    pub x: f64,
    /// Residual imaginary part of the preimage.
    pub x_imag: f64,
}

impl CurvePoint {
    pub fn density(&self) -> f64 {
        self.r * sin_pi(self.theta / PI) / PI
    }
}

/// Where a requested `x` falls relative to the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Interior,
    /// Gap of the positive law on `(0, x*)`, or any `x > 0` when `rho = 0`.
    Gap,
    /// Beyond the right edge of a compactly supported side.
    Beyond,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub density: f64,
    pub support: Support,
    pub point: Option<CurvePoint>,
}

fn radius_t(alpha: f64, rho: f64, t: f64) -> f64 {
    // (1 - αρ) + (α - 1)t rewritten so that it is exact at ρ = 1
    let a = (1.0 - rho) + (1.0 - alpha) * (rho - t);
    (sin_pi(t) / sin_pi(a)).powf(1.0 / alpha)
}

fn image_t(alpha: f64, rho: f64, t: f64) -> (f64, f64, f64) {
    let r = radius_t(alpha, rho, t);
    let phase = alpha * rho - (alpha - 1.0) * t;
    let ra = r.powf(alpha - 1.0);
    let x = cos_pi(t) / r - ra * cos_pi(phase);
    let im = sin_pi(t) / r - ra * sin_pi(phase);
    (r, x, im)
}

fn point_t(alpha: f64, rho: f64, t: f64) -> CurvePoint {
    let (r, x, im) = image_t(alpha, rho, t);
    CurvePoint {
        theta: PI * t,
        r,
        w: Complex::new(r * cos_pi(t), -r * sin_pi(t)),
        x,
        x_imag: im,
    }
}

fn theta_to_t(p: &FreeStableParams, theta: f64) -> Result<f64> {
    let t = theta / PI;
    if !(t > 0.0 && t < p.rho()) {
        return Err(Error::domain(format!(
            "theta={theta} outside (0, pi*rho) for rho={}",
            p.rho()
        )));
    }
    Ok(t)
}

/// `r(θ)` for `θ in (0, πρ)`.
pub fn curve_radius(p: &FreeStableParams, theta: f64) -> Result<f64> {
    let t = theta_to_t(p, theta)?;
    Ok(radius_t(p.alpha(), p.rho(), t))
}

/// Curve point at angle `θ in (0, πρ)`.
pub fn real_axis_image(p: &FreeStableParams, theta: f64) -> Result<CurvePoint> {
    let t = theta_to_t(p, theta)?;
    Ok(point_t(p.alpha(), p.rho(), t))
}

/// Range of `x` covered by the curve: `(lower, upper)`.
///
/// `lower` is `x*` for the positive law with `alpha < 1` and 0 otherwise;
/// `upper` is finite only when `alpha rho = 1`.
pub fn curve_range(p: &FreeStableParams) -> (f64, f64) {
    let (a, r) = (p.alpha(), p.rho());
    let lower = if r == 1.0 && a < 1.0 {
        p.x_star().unwrap_or(0.0)
    } else {
        0.0
    };
    let upper = if a > 1.0 && a * r >= 1.0 {
        p.tail_onset()
    } else {
        f64::INFINITY
    };
    (lower, upper)
}

/// Finds the curve point whose preimage is `x > 0`.
pub fn solve_theta(p: &FreeStableParams, x: f64, tol: f64) -> Result<CurvePoint> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("solve_theta needs finite x > 0, got {x}")));
    }
    if !(p.rho() > 0.0) {
        return Err(Error::domain("solve_theta needs rho > 0"));
    }
    let (lower, upper) = curve_range(p);
    if x <= lower || x >= upper {
        return Err(Error::domain(format!(
            "x={x} has no preimage on the curve (range ({lower}, {upper}))"
        )));
    }
    let (alpha, rho) = (p.alpha(), p.rho());
    let mut lo = T_FLOOR;
    let mut hi = rho;
    let target_err = tol * (1.0 + x);
    for _ in 0..MAX_ITER {
        let mid = if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let (_, xm, _) = image_t(alpha, rho, mid);
        // x(t) is decreasing; overflow near t = 0 reads as +inf
        if xm > x || xm.is_nan() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let pt = point_t(alpha, rho, t);
    let err = (pt.x - x).abs();
    // near the support edges x(t) is flat and t is determined only loosely
    if err > target_err && hi - lo > 1e3 * f64::EPSILON * hi {
        return Err(Error::Convergence(format!(
            "bisection stalled at x={x}: t in [{lo:e}, {hi:e}], residual {err:e}"
        )));
    }
    Ok(pt)
}

/// Density with a support flag.
pub fn density_oracle_detail(p: &FreeStableParams, x: f64, tol: f64) -> Result<OracleValue> {
    if !x.is_finite() {
        return Err(Error::domain(format!("density_oracle needs finite x, got {x}")));
    }
    if x < 0.0 {
        return density_oracle_detail(&p.reflected(), -x, tol);
    }
    if x == 0.0 {
        return Ok(OracleValue {
            density: p.density_at_zero(),
            support: Support::Interior,
            point: None,
        });
    }
    if p.rho() == 0.0 {
        return Ok(OracleValue {
            density: 0.0,
            support: Support::Gap,
            point: None,
        });
    }
    let (lower, upper) = curve_range(p);
    if x <= lower {
        return Ok(OracleValue {
            density: 0.0,
            support: Support::Gap,
            point: None,
        });
    }
    if x >= upper {
        return Ok(OracleValue {
            density: 0.0,
            support: Support::Beyond,
            point: None,
        });
    }
    let pt = solve_theta(p, x, tol)?;
    Ok(OracleValue {
        density: pt.density(),
        support: Support::Interior,
        point: Some(pt),
    })
}

/// Density at any real `x` by curve inversion.
pub fn density_oracle(p: &FreeStableParams, x: f64, tol: f64) -> Result<f64> {
    density_oracle_detail(p, x, tol).map(|v| v.density)
}

/// Verifies on a log-spaced angle grid that the preimage is real and
/// decreasing (up to rounding where the curve meets a support edge and
/// `x(θ)` flattens out). Returns the worst scaled imaginary residual.
pub fn curve_self_test(p: &FreeStableParams, points: usize) -> Result<f64> {
    if !(p.rho() > 0.0) {
        return Ok(0.0);
    }
    let (alpha, rho) = (p.alpha(), p.rho());
    let lo: f64 = 1e-8 * rho;
    let hi = rho * (1.0 - 1e-9);
    let step = (hi / lo).ln() / (points - 1) as f64;
    let mut worst: f64 = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..points {
        let t = lo * (step * k as f64).exp();
        let t = t.min(hi);
        let (_, x, im) = image_t(alpha, rho, t);
        let scaled = im.abs() / (1.0 + x.abs());
        worst = worst.max(scaled);
        if !(x < prev || (x - prev).abs() <= 8.0 * f64::EPSILON * prev.abs()) {
            return Err(Error::Convergence(format!(
                "curve image not decreasing at t={t:e} for ({alpha}, {rho})"
            )));
        }
        prev = x;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn p(a: f64, r: f64) -> FreeStableParams {
        make_params(a, r).unwrap()
    }

    #[test]
    fn radius_examples() {
        let r = curve_radius(&p(0.5, 1.0), PI / 2.0).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
        let r = curve_radius(&p(2.0, 0.5), PI / 2.0 * (1.0 - 1e-12)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(curve_radius(&p(0.5, 0.5), PI / 2.0).is_err());
        assert!(curve_radius(&p(0.5, 0.5), 0.0).is_err());
    }

    #[test]
    fn image_examples() {
        let pt = real_axis_image(&p(2.0, 0.5), PI / 4.0).unwrap();
        assert!(pt.x_imag.abs() < 1e-12);
        assert!((pt.w - Complex::from_polar(pt.r, -PI / 4.0)).norm() < 1e-15);
        let near_top = real_axis_image(&p(0.7, 0.6), 0.6 * PI * (1.0 - 1e-10)).unwrap();
        assert!(near_top.x.abs() < 1e-8);
        let near_zero = real_axis_image(&p(0.7, 0.6), 1e-9).unwrap();
        assert!(near_zero.x > 1e6);
    }

    #[test]
    fn solve_examples() {
        let pt = solve_theta(&p(0.5, 1.0), 1.0, 1e-14).unwrap();
        assert!((pt.density() - 3.0_f64.sqrt() / (2.0 * PI)).abs() < 1e-13);
        assert!((pt.w.im + 3.0_f64.sqrt() / 2.0).abs() < 1e-12);

        let pt = solve_theta(&p(2.0, 0.5), 1e-12, 1e-14).unwrap();
        assert!((pt.theta - PI / 2.0).abs() < 1e-10);
        assert!((pt.density() - 1.0 / PI).abs() < 1e-12);

        let d = solve_theta(&p(0.7, 0.6), 10.0, 1e-14).unwrap().density();
        let lead = sin_pi(0.42) / PI * 10f64.powf(-1.7);
        assert!((d / lead - 1.0).abs() < 0.1);
    }

    #[test]
    fn semicircle_reproduced() {
        let sc = p(2.0, 0.5);
        for k in 0..=200 {
            let x = -2.5 + 5.0 * k as f64 / 200.0;
            let exact = if x.abs() < 2.0 {
                (4.0 - x * x).sqrt() / (2.0 * PI)
            } else {
                0.0
            };
            let d = density_oracle(&sc, x, 1e-15).unwrap();
            assert!((d - exact).abs() < 1e-10, "x={x}: {d} vs {exact}");
        }
        let v = density_oracle_detail(&sc, 2.5, 1e-12).unwrap();
        assert_eq!(v.support, Support::Beyond);
        assert_eq!(v.density, 0.0);
    }

    #[test]
    fn positive_law_gap_and_closed_form() {
        let pos = p(0.5, 1.0);
        let v = density_oracle_detail(&pos, 0.2, 1e-12).unwrap();
        assert_eq!((v.density, v.support), (0.0, Support::Gap));
        for &y in &[0.26_f64, 0.5, 3.0, 1e3] {
            let exact = (4.0 * y - 1.0).sqrt() / (2.0 * PI * y * y);
            let d = density_oracle(&pos, y, 1e-15).unwrap();
            assert!((d / exact - 1.0).abs() < 1e-10, "y={y}");
        }
        // reflection
        let neg = p(0.5, 0.0);
        assert_eq!(density_oracle(&neg, 1.0, 1e-12).unwrap(), 0.0);
        let d = density_oracle(&neg, -1.0, 1e-15).unwrap();
        assert!((d - 3.0_f64.sqrt() / (2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn continuity_at_origin() {
        for &(a, r) in &[(0.3, 0.2), (0.8, 0.5), (1.5, 0.4), (1.9, 0.5)] {
            let pp = p(a, r);
            let d = density_oracle(&pp, 1e-9, 1e-15).unwrap();
            assert!((d - sin_pi(r) / PI).abs() < 1e-6, "({a},{r}): {d}");
            let d = density_oracle(&pp, -1e-9, 1e-15).unwrap();
            assert!((d - sin_pi(r) / PI).abs() < 1e-6);
        }
    }

    #[test]
    fn curve_invariants() {
        let alphas = [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.01, 1.25, 1.5, 1.75, 2.0];
        for &a in &alphas {
            let (lo, hi) = if a < 1.0 { (0.0, 1.0) } else { (1.0 - 1.0 / a, 1.0 / a) };
            for k in 0..=4 {
                let r = lo + (hi - lo) * k as f64 / 4.0;
                let Ok(pp) = make_params(a, r) else { continue };
                let worst = curve_self_test(&pp, 1000).unwrap();
                assert!(worst <= 1e-12, "({a},{r}) residual {worst:e}");
            }
        }
    }

    #[test]
    fn one_sided_right_edge() {
        // alpha rho = 1: support of the positive side ends at the tail onset
        let pp = p(1.5, 2.0 / 3.0);
        let edge = pp.tail_onset();
        assert_eq!(density_oracle_detail(&pp, edge * 1.001, 1e-12).unwrap().support, Support::Beyond);
        let d = density_oracle(&pp, edge * 0.999, 1e-14).unwrap();
        assert!(d > 0.0 && d < 0.05);
    }
}
