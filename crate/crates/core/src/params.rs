//! Parameter domain of strictly free stable laws.
//!
//! A law is identified by the stability index `alpha` and the positivity
//! parameter `rho = P(X > 0)`. The admissible set is
//!
//! ```text
//! alpha in (0, 1), rho in [0, 1]    or    alpha in (1, 2], rho in [1 - 1/alpha, 1/alpha]
//! ```
//!
//! The older `(alpha, rho_tilde)` form ([`BpbParams`]) is supported through
//! [`from_bpb`] / [`to_bpb`]. The map is piecewise: identity in `rho` for
//! `alpha < 1` and `rho = (1 - (2 - alpha) rho_tilde) / alpha` for `alpha > 1`.
//! Both branches are the unique choice that makes the two forms of the
//! Voiculescu transform coincide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{cos_pi, sin_pi, Complex};

/// Validated `(alpha, rho)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FreeStableParams {
    alpha: f64,
    rho: f64,
    /// `1 - rho` as seen by the reflected law; kept so that reflecting twice
    /// restores `rho` bit for bit.
    rho_reflected: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    rho: f64,
}

impl TryFrom<RawParams> for FreeStableParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.alpha, r.rho)
    }
}

impl From<FreeStableParams> for RawParams {
    fn from(p: FreeStableParams) -> Self {
        Self {
            alpha: p.alpha,
            rho: p.rho,
        }
    }
}

/// Parameters in the `(alpha, rho_tilde)` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpbParams {
    pub alpha: f64,
    pub rho_tilde: f64,
}

/// The Voiculescu transform `phi(z) = phase * z^exponent` with
/// `phase = -exp(i pi alpha rho)` and `exponent = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiculescuCoefficient {
    pub phase: Complex,
    pub exponent: f64,
}

impl VoiculescuCoefficient {
    /// `phi(z)` on the principal branch.
    pub fn apply(&self, z: Complex) -> Complex {
        self.phase * z.powf(self.exponent)
    }
}

/// Slack allowed at the ends of the `rho` interval for `alpha > 1`, whose
/// endpoints `1 - 1/alpha` and `1/alpha` are themselves rounded.
const RHO_SLACK: f64 = 4.0 * f64::EPSILON;

/// `rho` interval for a given `alpha`, or `None` if `alpha` is inadmissible.
pub fn rho_range(alpha: f64) -> Option<(f64, f64)> {
    if alpha > 0.0 && alpha < 1.0 {
        Some((0.0, 1.0))
    } else if alpha > 1.0 && alpha <= 2.0 {
        Some((1.0 - 1.0 / alpha, 1.0 / alpha))
    } else {
        None
    }
}

/// Closed-interval admissibility test. For `alpha > 1` values within a few
/// ulps of an endpoint count as that endpoint.
pub fn is_admissible(alpha: f64, rho: f64) -> bool {
    snap_rho(alpha, rho).is_some()
}

fn snap_rho(alpha: f64, rho: f64) -> Option<f64> {
    if !(alpha.is_finite() && rho.is_finite()) {
        return None;
    }
    let (lo, hi) = rho_range(alpha)?;
    if (lo..=hi).contains(&rho) {
        return Some(rho);
    }
    if alpha < 1.0 {
        return None;
    }
    if (rho - lo).abs() <= RHO_SLACK {
        Some(lo)
    } else if (rho - hi).abs() <= RHO_SLACK {
        Some(hi)
    } else {
        None
    }
}

/// Validates `(alpha, rho)`.
pub fn make_params(alpha: f64, rho: f64) -> Result<FreeStableParams> {
    FreeStableParams::new(alpha, rho)
}

impl FreeStableParams {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if alpha == 1.0 {
            return Err(Error::domain("alpha=1 not admissible"));
        }
        match snap_rho(alpha, rho) {
            Some(rho) => {
                let c = 1.0 - rho;
                Ok(Self {
                    alpha,
                    rho,
                    rho_reflected: snap_rho(alpha, c).unwrap_or(c),
                })
            }
            None => Err(Error::domain(format!(
                "(alpha, rho) = ({alpha}, {rho}) not admissible"
            ))),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(alpha, 1 - rho)`: the law of `-X`.
    pub fn reflected(&self) -> Self {
        Self {
            alpha: self.alpha,
            rho: self.rho_reflected,
            rho_reflected: self.rho,
        }
    }

    /// `(1/alpha, alpha rho)`, defined for `alpha >= 1/2` whenever the image
    /// is admissible (always for `alpha > 1`).
    pub fn dual(&self) -> Result<Self> {
        if self.alpha < 0.5 {
            return Err(Error::domain(format!(
                "dual requires alpha >= 1/2, got {}",
                self.alpha
            )));
        }
        let alpha = 1.0 / self.alpha;
        let mut rho = self.alpha * self.rho;
        if self.alpha > 1.0 {
            rho = rho.clamp(0.0, 1.0);
        }
        Self::new(alpha, rho)
    }

    /// `alpha (1 - alpha)^(1/alpha - 1)`, the point where the two density
    /// series for `alpha < 1` meet.
    pub fn x_star(&self) -> Result<f64> {
        if self.alpha > 1.0 {
            return Err(Error::domain("x_star is defined for alpha < 1 only"));
        }
        Ok(series_radius(self.alpha))
    }

    /// Onset of the convergent power-law tail expansion
    /// `sum c_n x^(-alpha n - 1)`: `alpha |1 - alpha|^(1/alpha - 1)`.
    ///
    /// Equals `x_star` for `alpha < 1`; for `alpha > 1` it is the image of the
    /// dual law's `x_star` under `y -> y^(-1/alpha)`.
    pub fn tail_onset(&self) -> f64 {
        series_radius(self.alpha)
    }

    pub fn voiculescu(&self) -> VoiculescuCoefficient {
        let t = self.alpha * self.rho;
        VoiculescuCoefficient {
            phase: Complex::new(-cos_pi(t), -sin_pi(t)),
            exponent: 1.0 - self.alpha,
        }
    }

    /// `sin(pi rho) / pi`, the density at the origin.
    pub fn density_at_zero(&self) -> f64 {
        sin_pi(self.rho) / std::f64::consts::PI
    }
}

pub(crate) fn series_radius(alpha: f64) -> f64 {
    alpha * (1.0 - alpha).abs().powf(1.0 / alpha - 1.0)
}

impl BpbParams {
    pub fn new(alpha: f64, rho_tilde: f64) -> Result<Self> {
        let alpha_ok = (alpha > 0.0 && alpha < 1.0) || (alpha > 1.0 && alpha <= 2.0);
        if !alpha_ok || !(0.0..=1.0).contains(&rho_tilde) {
            return Err(Error::domain(format!(
                "(alpha, rho_tilde) = ({alpha}, {rho_tilde}) not admissible"
            )));
        }
        Ok(Self { alpha, rho_tilde })
    }
}

pub fn from_bpb(p: BpbParams) -> Result<FreeStableParams> {
    let p = BpbParams::new(p.alpha, p.rho_tilde)?;
    let rho = if p.alpha < 1.0 {
        p.rho_tilde
    } else {
        let r = (1.0 - (2.0 - p.alpha) * p.rho_tilde) / p.alpha;
        r.clamp(1.0 - 1.0 / p.alpha, 1.0 / p.alpha)
    };
    FreeStableParams::new(p.alpha, rho)
}

/// Inverse of [`from_bpb`]. At `alpha = 2` every `rho_tilde` maps to the same
/// law; `rho_tilde = 0` is returned.
pub fn to_bpb(p: FreeStableParams) -> BpbParams {
    let rho_tilde = if p.alpha < 1.0 {
        p.rho
    } else if p.alpha == 2.0 {
        0.0
    } else {
        ((1.0 - p.alpha * p.rho) / (2.0 - p.alpha)).clamp(0.0, 1.0)
    };
    BpbParams {
        alpha: p.alpha,
        rho_tilde,
    }
}
