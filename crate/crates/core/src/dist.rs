//! Public distribution API.
//!
//! [`FreeStable`] owns the cached series coefficients for one law and lazily
//! builds a [`QuantileTable`]. The free functions at the bottom of the module
//! are convenience wrappers that build a fresh object per call.
//!
//! Density routing:
//!
//! * `alpha < 1`: the `x^(n-1)` series below `x*`, the `x^(-αn-1)` series
//!   above, and the curve-inversion oracle within 5% of `x*` where both
//!   converge slowly.
//! * `alpha > 1`: `ψ(x) = x^(-α-1) ψ'(x^(-α))` with `ψ'` the density of the
//!   dual law `(1/α, αρ)`, evaluated by the rule above.
//! * `x < 0`: `ψ_{α,ρ}(x) = ψ_{α,1-ρ}(-x)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inversion::{self, curve_range};
use crate::params::FreeStableParams;
use crate::quad::{self, HalfLine, IntegralResult, QuadConfig};
use crate::series::{
    self, cf_series_raw, classical_density_at_zero, ClassicalMode, DensitySeries, SeriesEval,
    TailExpansion,
};
use crate::specfun::{log_gamma, rec_gamma_complex, sin_pi, sin_pi_complex, Complex};

/// Half-width of the band around `x*` routed to the oracle, relative to `x*`.
const BAND: f64 = 0.05;
const SERIES_TOL: f64 = 1e-15;
const ORACLE_TOL: f64 = 1e-15;
/// Cells per half-line in the quantile table.
const TABLE_CELLS: usize = 512;
/// Largest acceptable rounding error of the CF series before falling back to
/// quadrature.
const CF_SERIES_ABS_ERR: f64 = 1e-12;
const CF_FOURIER_TOL: f64 = 1e-10;

/// Density evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Series,
    Inversion,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Series => "series",
            Method::Inversion => "inversion",
        }
    }
}

/// The density of one law on `[0, inf)`.
#[derive(Debug, Clone)]
struct HalfDensity {
    p: FreeStableParams,
    /// Series of `p` itself for `alpha < 1`, of its dual for `alpha > 1`.
    base: DensitySeries,
    tail: Option<TailExpansion>,
    lower: f64,
    upper: f64,
}

impl HalfDensity {
    fn new(p: FreeStableParams) -> Result<Self> {
        let base = if p.alpha() < 1.0 {
            DensitySeries::new(p)?
        } else {
            DensitySeries::new(p.dual()?)?
        };
        let (lower, upper) = if p.rho() == 0.0 {
            (0.0, 0.0)
        } else {
            curve_range(&p)
        };
        let tail = if upper.is_finite() {
            None
        } else {
            Some(TailExpansion::new(&p, 2.0 * p.tail_onset()))
        };
        Ok(Self {
            p,
            base,
            tail,
            lower,
            upper,
        })
    }

    fn is_empty(&self) -> bool {
        self.p.rho() == 0.0
    }

    fn base_value(&self, y: f64, banded: bool) -> Result<f64> {
        let xs = self.base.x_star();
        if banded && (y - xs).abs() <= BAND * xs {
            inversion::density_oracle(self.base.params(), y, ORACLE_TOL)
        } else {
            Ok(self.base.density(y, SERIES_TOL).value)
        }
    }

    fn pdf(&self, x: f64, method: Method) -> Result<f64> {
        if x == 0.0 {
            return Ok(self.p.density_at_zero());
        }
        if method == Method::Inversion {
            return inversion::density_oracle(&self.p, x, ORACLE_TOL);
        }
        let banded = method == Method::Auto;
        let a = self.p.alpha();
        if a < 1.0 {
            return self.base_value(x, banded);
        }
        let y = x.powf(-a);
        if x < 1e-20 || !y.is_finite() {
            // analytic at the origin; below this the correction is under one ulp
            return Ok(self.p.density_at_zero());
        }
        Ok(self.base_value(y, banded)? * (y / x))
    }

    fn kinks(&self) -> Vec<f64> {
        let a = self.p.alpha();
        let xs = self.base.x_star();
        let band = [(1.0 - BAND) * xs, xs, (1.0 + BAND) * xs];
        if a < 1.0 {
            band.to_vec()
        } else {
            band.iter().map(|y| y.powf(-1.0 / a)).collect()
        }
    }
}

/// A free stable law with cached evaluation state.
#[derive(Debug)]
pub struct FreeStable {
    params: FreeStableParams,
    pos: HalfDensity,
    neg: HalfDensity,
    table: OnceLock<std::result::Result<QuantileTable, Error>>,
}

impl Clone for FreeStable {
    fn clone(&self) -> Self {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        Self {
            params: self.params,
            pos: self.pos.clone(),
            neg: self.neg.clone(),
            table,
        }
    }
}

impl FreeStable {
    pub fn new(params: FreeStableParams) -> Result<Self> {
        Ok(Self {
            params,
            pos: HalfDensity::new(params)?,
            neg: HalfDensity::new(params.reflected())?,
            table: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &FreeStableParams {
        &self.params
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.pdf_with(x, Method::Auto)
    }

    pub fn pdf_with(&self, x: f64, method: Method) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("pdf of NaN"));
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        let v = if x >= 0.0 {
            self.pos.pdf(x, method)?
        } else {
            self.neg.pdf(-x, method)?
        };
        if v.is_finite() {
            Ok(v.max(0.0))
        } else {
            Err(Error::Convergence(format!("density evaluation at x={x} gave {v}")))
        }
    }

    /// The quantile table, built on first use.
    pub fn table(&self) -> Result<&QuantileTable> {
        self.table
            .get_or_init(|| QuantileTable::build(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn half_mass_to(&self, half: &HalfDensity, ht: &HalfTable, x: f64) -> Result<f64> {
        if ht.empty || x <= ht.map.start() {
            return Ok(0.0);
        }
        if x >= ht.map.end() {
            return Ok(match (&half.tail, half.upper.is_finite()) {
                (Some(t), false) => ht.cells_mass() + ht.tail_mass_at_end - t.upper_mass(x),
                _ => ht.total,
            });
        }
        let u = ht.map.u(x);
        let i = ht.cell_of_u(u);
        let g = |v: f64| {
            let xv = ht.map.x(v);
            half.pdf(xv, Method::Auto).unwrap_or(f64::NAN) * ht.map.dx(v)
        };
        let r = quad::integrate_with(
            g,
            ht.u[i],
            u,
            QuadConfig {
                abs_tol: 1e-16,
                rel_tol: 1e-14,
                budget: quad::DEFAULT_BUDGET,
            },
        )?;
        let m = ht.mass[i] + r.value;
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::Convergence(format!("cdf integration failed at x={x}")))
        }
    }

    /// `P(X <= x)`, anchored so that `cdf(0) = 1 - rho` exactly.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain("cdf of NaN"));
        }
        let base = 1.0 - self.params.rho();
        if x == 0.0 {
            return Ok(base);
        }
        let t = self.table()?;
        let v = if x > 0.0 {
            base + self.half_mass_to(&self.pos, &t.pos, x)?
        } else {
            base - self.half_mass_to(&self.neg, &t.neg, -x)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Inverse CDF: the table model polished by Newton steps on the exact CDF.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile needs q in (0, 1), got {q}")));
        }
        let t = self.table()?;
        let mut x = t.model_quantile(q);
        if !x.is_finite() {
            return Ok(x);
        }
        let (lo, hi) = t.support();
        for _ in 0..20 {
            let f = self.cdf(x)? - q;
            if f.abs() <= 1e-12 {
                break;
            }
            let d = self.pdf(x)?;
            if !(d > 0.0) {
                break;
            }
            let step = f / d;
            let next = (x - step).clamp(lo, hi);
            if next == x {
                break;
            }
            x = next;
        }
        Ok(x)
    }

    /// Characteristic function `E[e^{izX}]`.
    ///
    /// The series is used while its rounding error stays below `1e-12`;
    /// beyond that the Fourier integral of the density takes over.
    pub fn cf(&self, z: f64) -> Result<Complex> {
        self.cf_with(z, CF_FOURIER_TOL)
    }

    /// [`cf`](Self::cf) with the Fourier fallback held to `fourier_tol`.
    pub fn cf_with(&self, z: f64, fourier_tol: f64) -> Result<Complex> {
        if !z.is_finite() {
            return Err(Error::domain(format!("cf needs finite z, got {z}")));
        }
        if z == 0.0 {
            return Ok(Complex::new(1.0, 0.0));
        }
        let za = z.abs();
        let (ev, max_term) = cf_series_raw(&self.params, za)?;
        let v = if ev.converged && max_term * f64::EPSILON <= CF_SERIES_ABS_ERR {
            ev.value
        } else {
            self.cf_fourier(za, fourier_tol)?.value
        };
        Ok(if z > 0.0 { v } else { v.conj() })
    }

    /// Fourier integral of the density.
    pub fn cf_fourier(&self, z: f64, tol: f64) -> Result<IntegralResult<Complex>> {
        let fp = |x: f64| self.pos.pdf(x, Method::Auto).unwrap_or(f64::NAN);
        let fn_ = |x: f64| self.neg.pdf(x, Method::Auto).unwrap_or(f64::NAN);
        let right = half_line(&self.pos, &fp);
        let left = half_line(&self.neg, &fn_);
        let r = quad::fourier_integral(&right, &left, z, tol)?;
        if r.value.re.is_finite() && r.value.im.is_finite() {
            Ok(r)
        } else {
            Err(Error::Convergence(format!("Fourier integral at z={z} not finite")))
        }
    }

    /// `∫_0^∞ ψ` (positive half) by direct quadrature, independent of the
    /// quantile table.
    pub fn positive_mass(&self, tol: f64) -> Result<IntegralResult> {
        let f = |x: f64| self.pos.pdf(x, Method::Auto).unwrap_or(f64::NAN);
        let h = half_line(&self.pos, &f);
        quad::half_mass(&h, tol)
    }

    /// `∫_{-∞}^0 ψ` by direct quadrature.
    pub fn negative_mass(&self, tol: f64) -> Result<IntegralResult> {
        let f = |x: f64| self.neg.pdf(x, Method::Auto).unwrap_or(f64::NAN);
        let h = half_line(&self.neg, &f);
        quad::half_mass(&h, tol)
    }

    /// `∫_0^∞ x^s ψ(x) dx` by quadrature, for real `s` in `(-1, alpha)`.
    pub fn mellin_quadrature(&self, s: f64, tol: f64) -> Result<f64> {
        mellin_half_quadrature(&self.pos, s, tol)
    }

    pub fn sample(&self, rng: &mut RngState, n: usize) -> Result<Vec<f64>> {
        let t = self.table()?;
        Ok((0..n).map(|_| t.model_quantile(rng.uniform())).collect())
    }
}

fn half_line<'a>(h: &'a HalfDensity, f: &'a (dyn Fn(f64) -> f64 + Sync)) -> HalfLine<'a> {
    HalfLine {
        density: f,
        lower: h.lower,
        upper: if h.is_empty() { 0.0 } else { h.upper },
        tail: h.tail.as_ref(),
        kinks: if h.is_empty() { Vec::new() } else { h.kinks() },
    }
}

/// `∫_0^∞ x^s ψ(x) dx` for one half.
///
/// Near 0 the substitution `x = t^(1/(s+1))` removes the `x^s` singularity;
/// beyond `a = 2 * onset` the integrand decays like `x^(s-α-1)` and is handled
/// by the power-law tail map with exponent `α - s`.
fn mellin_half_quadrature(h: &HalfDensity, s: f64, tol: f64) -> Result<f64> {
    let a = h.p.alpha();
    if !(s > -1.0 && s < a) {
        return Err(Error::domain(format!("s={s} outside (-1, {a})")));
    }
    if h.is_empty() {
        return Ok(0.0);
    }
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: tol,
        budget: quad::DEFAULT_BUDGET,
    };
    let f = |x: f64| h.pdf(x, Method::Auto).unwrap_or(f64::NAN);
    let mut total = 0.0;
    let onset = h.p.tail_onset();
    let split = if h.lower > 0.0 { h.lower } else { onset.min(1.0) };
    // [0, split]
    if h.lower == 0.0 {
        let k = 1.0 / (s + 1.0);
        let tmax = split.powf(s + 1.0);
        let r = quad::integrate_with(|t: f64| f(t.powf(k)) * k, 0.0, tmax, cfg)?;
        total += r.value;
    }
    let end = if h.upper.is_finite() {
        h.upper
    } else {
        (2.0 * onset).max(2.0 * split)
    };
    let mut breaks = vec![split];
    breaks.extend(h.kinks().into_iter().filter(|&k| k > split && k < end));
    breaks.push(end);
    for w in breaks.windows(2) {
        let r = quad::integrate_with(|x: f64| x.powf(s) * f(x), w[0], w[1], cfg)?;
        total += r.value;
    }
    if !h.upper.is_finite() {
        let r = quad::tail_powerlaw_with(|x: f64| x.powf(s) * f(x), end, a - s, cfg)?;
        total += r.value;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Convergence(format!("Mellin quadrature at s={s} failed")))
    }
}

/// Node placement on one half-line, `u in [0, 1]`.
#[derive(Debug, Clone, Copy)]
enum GridMap {
    Linear { end: f64 },
    /// Square-root edge at `lower`: `x = lower + (end - lower) u^2`.
    LowerEdge { lower: f64, end: f64 },
    /// Square-root edge at `upper`: `x = upper (1 - (1 - u)^2)`.
    UpperEdge { upper: f64 },
}

impl GridMap {
    fn x(&self, u: f64) -> f64 {
        match *self {
            GridMap::Linear { end } => end * u,
            GridMap::LowerEdge { lower, end } => lower + (end - lower) * u * u,
            GridMap::UpperEdge { upper } => upper * (1.0 - (1.0 - u) * (1.0 - u)),
        }
    }

    fn dx(&self, u: f64) -> f64 {
        match *self {
            GridMap::Linear { end } => end,
            GridMap::LowerEdge { lower, end } => 2.0 * (end - lower) * u,
            GridMap::UpperEdge { upper } => 2.0 * upper * (1.0 - u),
        }
    }

    fn u(&self, x: f64) -> f64 {
        let u = match *self {
            GridMap::Linear { end } => x / end,
            GridMap::LowerEdge { lower, end } => ((x - lower) / (end - lower)).max(0.0).sqrt(),
            GridMap::UpperEdge { upper } => 1.0 - ((upper - x) / upper).max(0.0).sqrt(),
        };
        u.clamp(0.0, 1.0)
    }

    fn start(&self) -> f64 {
        self.x(0.0)
    }

    fn end(&self) -> f64 {
        self.x(1.0)
    }
}

#[derive(Debug, Clone)]
struct HalfTable {
    empty: bool,
    map: GridMap,
    u: Vec<f64>,
    /// Cumulative mass at the nodes.
    mass: Vec<f64>,
    /// `dF/du` at the nodes.
    slope: Vec<f64>,
    tail: Option<TailExpansion>,
    tail_mass_at_end: f64,
    total: f64,
}

impl HalfTable {
    fn build(h: &HalfDensity) -> Result<Self> {
        if h.is_empty() {
            return Ok(Self {
                empty: true,
                map: GridMap::Linear { end: 0.0 },
                u: vec![0.0],
                mass: vec![0.0],
                slope: vec![0.0],
                tail: None,
                tail_mass_at_end: 0.0,
                total: 0.0,
            });
        }
        let reach = 2.0 * h.p.tail_onset();
        let map = if h.upper.is_finite() {
            GridMap::UpperEdge { upper: h.upper }
        } else if h.lower > 0.0 {
            GridMap::LowerEdge {
                lower: h.lower,
                end: reach.max(2.0 * h.lower),
            }
        } else {
            GridMap::Linear { end: reach }
        };
        let n = TABLE_CELLS;
        let u: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let g = |v: f64| h.pdf(map.x(v), Method::Auto).unwrap_or(f64::NAN) * map.dx(v);
        let slope: Vec<f64> = u.par_iter().map(|&v| g(v)).collect();
        let cfg = QuadConfig {
            abs_tol: 1e-16,
            rel_tol: 1e-14,
            budget: quad::DEFAULT_BUDGET,
        };
        let cells: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| quad::integrate_with(g, u[i], u[i + 1], cfg).map(|r| r.value))
            .collect::<Result<_>>()?;
        let mut mass = Vec::with_capacity(n + 1);
        let mut acc = series::Neumaier::default();
        mass.push(0.0);
        for c in cells {
            acc.add(c);
            mass.push(acc.value());
        }
        let tail = h.tail.clone();
        let tail_mass_at_end = tail.as_ref().map_or(0.0, |t| t.upper_mass(map.end()));
        let total = mass[n] + tail_mass_at_end;
        if !total.is_finite() || slope.iter().any(|s| !s.is_finite()) {
            return Err(Error::Convergence(format!(
                "quantile table for ({}, {}) has non-finite entries",
                h.p.alpha(),
                h.p.rho()
            )));
        }
        Ok(Self {
            empty: false,
            map,
            u,
            mass,
            slope,
            tail,
            tail_mass_at_end,
            total,
        })
    }

    fn cells_mass(&self) -> f64 {
        *self.mass.last().unwrap_or(&0.0)
    }

    fn cell_of_u(&self, u: f64) -> usize {
        let n = self.u.len() - 1;
        ((u * n as f64).floor() as usize).min(n - 1)
    }

    fn hermite(&self, i: usize, t: f64) -> (f64, f64) {
        let h = self.u[i + 1] - self.u[i];
        let (f0, f1) = (self.mass[i], self.mass[i + 1]);
        let (d0, d1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * f1
            + (3.0 * t2 - 2.0 * t) * d1;
        (v, dv)
    }

    /// Interpolated mass on `[start, x]`.
    fn model_mass(&self, x: f64) -> f64 {
        if self.empty || x <= self.map.start() {
            return 0.0;
        }
        if x >= self.map.end() {
            return match &self.tail {
                Some(t) => self.cells_mass() + self.tail_mass_at_end - t.upper_mass(x),
                None => self.total,
            };
        }
        let u = self.map.u(x);
        let i = self.cell_of_u(u);
        let t = (u - self.u[i]) / (self.u[i + 1] - self.u[i]);
        self.hermite(i, t).0
    }

    /// Inverse of [`model_mass`](Self::model_mass).
    fn model_inverse(&self, m: f64) -> f64 {
        if self.empty || m <= 0.0 {
            return self.map.start();
        }
        let top = self.cells_mass();
        if m >= top {
            return match &self.tail {
                Some(t) => self.tail_inverse(t, self.tail_mass_at_end - (m - top)),
                None => self.map.end(),
            };
        }
        let i = match self.mass.binary_search_by(|v| v.total_cmp(&m)) {
            Ok(k) => return self.map.x(self.u[k]),
            Err(k) => k - 1,
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = (m - self.mass[i]) / (self.mass[i + 1] - self.mass[i]);
        for _ in 0..60 {
            let (v, dv) = self.hermite(i, t);
            let f = v - m;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = if dv > 0.0 { t - f / dv } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        let u = self.u[i] + t * (self.u[i + 1] - self.u[i]);
        self.map.x(u)
    }

    /// Solves `upper_mass(x) = tau` for `x >= end`, by Newton in `q`.
    fn tail_inverse(&self, tail: &TailExpansion, tau: f64) -> f64 {
        let q_end = tail.q_of(self.map.end());
        if tau >= self.tail_mass_at_end {
            return self.map.end();
        }
        let tau = tau.max(f64::MIN_POSITIVE);
        let lead = tail.leading();
        let (mut lo, mut hi) = (0.0, q_end);
        // T(q) ≈ lead q / alpha for small q
        let (t_end, _) = tail.mass_in_q(q_end);
        let mut q = if lead > 0.0 {
            (tau / t_end * q_end).min(q_end)
        } else {
            0.5 * q_end
        };
        for _ in 0..100 {
            let (v, dv) = tail.mass_in_q(q);
            let f = v - tau;
            if f > 0.0 {
                hi = q;
            } else {
                lo = q;
            }
            let mut next = if dv > 0.0 { q - f / dv } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - q).abs() <= 1e-15 * q {
                q = next;
                break;
            }
            q = next;
        }
        tail.x_of_q(q)
    }
}

/// Tabulated CDF of a free stable law with a cubic Hermite interpolant.
///
/// Each half-line `[0, inf)` of the law and of its reflection carries 512
/// cells in a mapped variable `u` that clusters nodes at square-root support
/// edges. Cumulative masses come from adaptive quadrature, node slopes from
/// the density itself. Beyond `2 * onset` the convergent tail expansion of
/// the mass takes over.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    params: FreeStableParams,
    pos: HalfTable,
    neg: HalfTable,
}

impl QuantileTable {
    pub fn new(p: FreeStableParams) -> Result<Self> {
        Self::build(&FreeStable::new(p)?)
    }

    fn build(d: &FreeStable) -> Result<Self> {
        Ok(Self {
            params: d.params,
            pos: HalfTable::build(&d.pos)?,
            neg: HalfTable::build(&d.neg)?,
        })
    }

    pub fn params(&self) -> &FreeStableParams {
        &self.params
    }

    /// Tabulated `(x, F(x))` pairs in increasing `x`.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let base = 1.0 - self.params.rho();
        let mut out = Vec::new();
        if !self.neg.empty {
            for i in (0..self.neg.u.len()).rev() {
                let x = -self.neg.map.x(self.neg.u[i]);
                if x < 0.0 {
                    out.push((x, base - self.neg.mass[i]));
                }
            }
        }
        out.push((0.0, base));
        if !self.pos.empty {
            for i in 0..self.pos.u.len() {
                let x = self.pos.map.x(self.pos.u[i]);
                if x > 0.0 {
                    out.push((x, base + self.pos.mass[i]));
                }
            }
        }
        out
    }

    /// Tail constants `sin(παρ)/(πα)` and `sin(πα(1-ρ))/(πα)`: the mass
    /// beyond `x` on either side is `~ c x^(-α)`.
    pub fn tail_constants(&self) -> (f64, f64) {
        let (a, r) = (self.params.alpha(), self.params.rho());
        (sin_pi(a * r) / (PI * a), sin_pi(a * (1.0 - r)) / (PI * a))
    }

    /// Total tabulated mass of each half (`≈ rho` and `≈ 1 - rho`).
    pub fn half_masses(&self) -> (f64, f64) {
        (self.pos.total, self.neg.total)
    }

    /// Interpolated CDF.
    pub fn model_cdf(&self, x: f64) -> f64 {
        let base = 1.0 - self.params.rho();
        let v = if x >= 0.0 {
            base + self.pos.model_mass(x)
        } else {
            base - self.neg.model_mass(-x)
        };
        v.clamp(0.0, 1.0)
    }

    /// Interpolated quantile, no polishing.
    pub fn model_quantile(&self, q: f64) -> f64 {
        let base = 1.0 - self.params.rho();
        if q >= base {
            self.pos.model_inverse(q - base)
        } else {
            -self.neg.model_inverse(base - q)
        }
    }

    /// Smallest and largest points of the support.
    pub fn support(&self) -> (f64, f64) {
        let hi = if self.pos.empty {
            0.0
        } else if self.pos.tail.is_some() {
            f64::INFINITY
        } else {
            self.pos.map.end()
        };
        let lo = if self.neg.empty {
            0.0
        } else if self.neg.tail.is_some() {
            f64::NEG_INFINITY
        } else {
            -self.neg.map.end()
        };
        let lo = if self.neg.empty && !self.pos.empty {
            self.pos.map.start()
        } else {
            lo
        };
        let hi = if self.pos.empty && !self.neg.empty {
            -self.neg.map.start()
        } else {
            hi
        };
        (lo, hi)
    }
}

/// Seeded random stream (ChaCha8).
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Independent stream number `index`, seeded by
    /// `splitmix64(seed ^ splitmix64(index))`.
    pub fn split(&self, index: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(index)))
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}

// ---------------------------------------------------------------------------
// Mellin transforms

fn strip_check(p: &FreeStableParams, s: Complex) -> Result<()> {
    if !(s.re > -1.0 && s.re < p.alpha()) || !s.im.is_finite() {
        return Err(Error::domain(format!(
            "Re(s)={} outside (-1, {})",
            s.re,
            p.alpha()
        )));
    }
    Ok(())
}

/// `sin(πρs)Γ(s)/π`, continuous through `s = 0` where it equals `ρ`.
fn sin_gamma_over_pi(rho: f64, s: Complex) -> Result<Complex> {
    let lg1 = log_gamma(s + 1.0)?;
    let ratio = if s.norm() < 1e-5 {
        let w = s * (PI * rho);
        Complex::new(rho, 0.0) * (Complex::new(1.0, 0.0) - w * w / 6.0)
    } else {
        sin_pi_complex(s * rho) / (s * PI)
    };
    Ok(ratio * lg1.exp())
}

/// `E[X^s 1_{X>0}]` for the free law, `Re(s) in (-1, alpha)`.
pub fn mellin_free(p: &FreeStableParams, s: Complex) -> Result<Complex> {
    strip_check(p, s)?;
    let a = p.alpha();
    let core = sin_gamma_over_pi(p.rho(), s)? * log_gamma(Complex::new(1.0, 0.0) - s / a)?.exp();
    Ok(core * rec_gamma_complex(s + 2.0 - s / a))
}

/// `E[Y^s 1_{Y>0}]` for the classical strictly stable law with the same
/// `(alpha, rho)`.
pub fn mellin_classical(p: &FreeStableParams, s: Complex) -> Result<Complex> {
    strip_check(p, s)?;
    let a = p.alpha();
    Ok(sin_gamma_over_pi(p.rho(), s)? * log_gamma(Complex::new(1.0, 0.0) - s / a)?.exp())
}

/// `∫_0^∞ f(z) z^(s-1) dz` of the free characteristic function, `Re(s) > 0`.
pub fn mellin_cf(p: &FreeStableParams, s: Complex) -> Result<Complex> {
    if !(s.re > 0.0) || !s.im.is_finite() {
        return Err(Error::domain(format!("mellin_cf needs Re(s) > 0, got {s}")));
    }
    let a = p.alpha();
    let phase = (Complex::new(0.0, PI * (p.rho() - 0.5)) * s).exp();
    let g = log_gamma(s / a)?.exp();
    Ok(phase * g * rec_gamma_complex(Complex::new(2.0, 0.0) - s + s / a) / a)
}

/// `E|X|^s`, real `s in (-1, alpha)`.
pub fn abs_moment(p: &FreeStableParams, s: f64) -> Result<f64> {
    let s = Complex::new(s, 0.0);
    Ok((mellin_free(p, s)? + mellin_free(&p.reflected(), s)?).re)
}

// ---------------------------------------------------------------------------
// Convenience wrappers

pub fn pdf(p: &FreeStableParams, x: f64, method: Method) -> Result<f64> {
    FreeStable::new(*p)?.pdf_with(x, method)
}

pub fn cdf(p: &FreeStableParams, x: f64) -> Result<f64> {
    FreeStable::new(*p)?.cdf(x)
}

pub fn quantile(p: &FreeStableParams, q: f64) -> Result<f64> {
    FreeStable::new(*p)?.quantile(q)
}

pub fn cf(p: &FreeStableParams, z: f64) -> Result<Complex> {
    FreeStable::new(*p)?.cf(z)
}

pub fn sample_free(p: &FreeStableParams, rng: &mut RngState, n: usize) -> Result<Vec<f64>> {
    FreeStable::new(*p)?.sample(rng, n)
}

/// Classical strictly stable samples as `X * Z^(1 - 1/alpha)` with `X` free
/// stable and `Z ~ Gamma(2)` drawn as a sum of two unit exponentials.
pub fn sample_classical(p: &FreeStableParams, rng: &mut RngState, n: usize) -> Result<Vec<f64>> {
    let d = FreeStable::new(*p)?;
    let t = d.table()?;
    let e = 1.0 - 1.0 / p.alpha();
    Ok((0..n)
        .map(|_| {
            let x = t.model_quantile(rng.uniform());
            let z = rng.exponential() + rng.exponential();
            x * z.powf(e)
        })
        .collect())
}

/// Samples of `K_ρ = -cos(πρ) + sin(πρ) tan(π(u - 1/2))`.
pub fn sample_cauchy_k(rho: f64, rng: &mut RngState, n: usize) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!("K_rho needs rho in (0, 1), got {rho}")));
    }
    let (c, s) = (crate::specfun::cos_pi(rho), sin_pi(rho));
    Ok((0..n)
        .map(|_| {
            let u = rng.uniform();
            -c + s * (PI * (u - 0.5)).tan()
        })
        .collect())
}

/// Density of the classical strictly stable law with the same `(alpha, rho)`.
///
/// The convergent expansion is used while it keeps its precision; otherwise
/// the optimally truncated asymptotic expansion is returned with
/// `converged = false` and its error estimate.
pub fn classical_pdf(p: &FreeStableParams, x: f64) -> Result<SeriesEval> {
    if !x.is_finite() {
        return Err(Error::domain(format!("classical_pdf needs finite x, got {x}")));
    }
    if x == 0.0 {
        return Ok(SeriesEval {
            value: classical_density_at_zero(p),
            terms_used: 1,
            trunc_estimate: 0.0,
            converged: true,
        });
    }
    if x < 0.0 {
        return classical_pdf(&p.reflected(), -x);
    }
    match series::classical_density_series(p, x, 1e-10, ClassicalMode::Convergent) {
        Ok(v) => Ok(v),
        Err(Error::Precision { .. }) => {
            series::classical_density_series(p, x, 1e-10, ClassicalMode::Asymptotic)
        }
        Err(e) => Err(e),
    }
}
