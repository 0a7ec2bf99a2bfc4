//! Direct series evaluators.
//!
//! * free density, `alpha < 1`, power-law side `x >= x*`:
//!   `(1/pi) sum (-1)^(n-1) Γ(1+αn) / (n! Γ(2+(α-1)n)) sin(nαρπ) x^(-αn-1)`
//! * free density, `alpha < 1`, near the origin `0 <= x <= x*`:
//!   `(1/pi) sum (-1)^(n-1) Γ(1+n/α) / (n! Γ(2+(1/α-1)n)) sin(nρπ) x^(n-1)`
//! * free characteristic function, `z >= 0`:
//!   `sum (-1)^n e^(iπα(1/2-ρ)n) z^(αn) / (n! Γ(2+(α-1)n))`
//! * classical stable density, the same two expansions without the
//!   `Γ(2 + ...)` denominators.
//!
//! The free density coefficients are stored normalized by the radius of
//! convergence, `x*^(-αn)` (resp. `x*^n`), so that they behave like `n^(-3/2)`
//! and never overflow. Each coefficient carries an envelope: its magnitude
//! with every oscillating sine factor dropped. Stopping and truncation bounds
//! use the envelope, because sine factors produce isolated zero terms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{series_radius, FreeStableParams};
use crate::specfun::{cos_pi, ln_gamma, ln_gamma_sign, sin_pi, Complex};

/// Hard cap on the number of terms of any series.
pub const TERM_CAP: usize = 20_000;

/// Result of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval<T = f64> {
    pub value: T,
    pub terms_used: usize,
    /// Estimate of the dropped remainder.
    pub trunc_estimate: f64,
    pub converged: bool,
}

impl<T> SeriesEval<T> {
    fn exact(value: T) -> Self {
        Self {
            value,
            terms_used: 1,
            trunc_estimate: 0.0,
            converged: true,
        }
    }
}

/// Which of the two free density expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// Powers `x^(-αn-1)`, convergent for `x >= onset`.
    Tail,
    /// Powers `x^(n-1)`, convergent for `|x| <= x*` (`alpha < 1` only).
    Power,
}

/// `ln |1/Γ(y)|` without the `|sin(πy)|` factor of the reflection formula,
/// together with the full signed reciprocal factor relative to it.
///
/// Returns `(ln_envelope, factor)` with `1/Γ(y) = factor * exp(ln_envelope)`
/// and `|factor| <= 1`.
fn rec_gamma_split(y: f64) -> (f64, f64) {
    if y >= 0.5 {
        (-ln_gamma(y), 1.0)
    } else {
        // 1/Γ(y) = sin(πy) Γ(1-y) / π
        (ln_gamma(1.0 - y) - PI.ln(), sin_pi(y))
    }
}

/// Generator of normalized free density coefficients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoeffGen {
    alpha: f64,
    rho: f64,
    kind: Expansion,
    ln_radius: f64,
}

impl CoeffGen {
    pub(crate) fn new(alpha: f64, rho: f64, kind: Expansion) -> Self {
        Self {
            alpha,
            rho,
            kind,
            ln_radius: series_radius(alpha).ln(),
        }
    }

    /// Whether every sine factor vanishes, making the series identically 0.
    pub(crate) fn vanishes(&self) -> bool {
        let t = match self.kind {
            Expansion::Tail => self.alpha * self.rho,
            Expansion::Power => self.rho,
        };
        t == t.round()
    }

    /// `(coefficient, envelope)` of term `n >= 1`, both normalized and
    /// including the `1/pi` prefactor.
    pub(crate) fn at(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let a = self.alpha;
        let (ln_num, y, trig, ln_norm) = match self.kind {
            Expansion::Tail => (
                ln_gamma(1.0 + a * nf),
                2.0 + (a - 1.0) * nf,
                sin_pi(nf * a * self.rho),
                -a * nf * self.ln_radius,
            ),
            Expansion::Power => (
                ln_gamma(1.0 + nf / a),
                2.0 + (1.0 / a - 1.0) * nf,
                sin_pi(nf * self.rho),
                nf * self.ln_radius,
            ),
        };
        let (ln_rec, rec_factor) = rec_gamma_split(y);
        let ln_env = ln_num - ln_gamma(nf + 1.0) + ln_rec + ln_norm - PI.ln();
        let env = ln_env.exp();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        (sign * rec_factor * trig * env, env)
    }
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierComplex {
    re: Neumaier,
    im: Neumaier,
}

impl NeumaierComplex {
    fn add(&mut self, v: Complex) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    fn value(&self) -> Complex {
        Complex::new(self.re.value(), self.im.value())
    }
}

/// Sums `sum_n coef_n q^(n - 1 + first_power)` for normalized coefficients.
///
/// Stops once three consecutive envelope terms and the geometric remainder
/// bound are below `tol * |partial sum|`.
pub(crate) fn sum_normalized(
    coeffs: impl Iterator<Item = (f64, f64)>,
    q: f64,
    first_power: i32,
    tol: f64,
) -> SeriesEval {
    let mut acc = Neumaier::default();
    let mut qp = q.powi(first_power);
    let mut small_run = 0;
    let mut terms = 0;
    let mut last_env = f64::INFINITY;
    for (n, (c, e)) in coeffs.enumerate().take(TERM_CAP) {
        let n = n + 1;
        acc.add(c * qp);
        let env = e * qp;
        terms = n;
        last_env = env;
        let s = acc.value().abs();
        if env <= tol * s {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            let bound = remainder_bound(env, q, n);
            if bound <= tol * s {
                return SeriesEval {
                    value: acc.value(),
                    terms_used: n,
                    trunc_estimate: bound,
                    converged: true,
                };
            }
        }
        qp *= q;
        if qp == 0.0 {
            return SeriesEval {
                value: acc.value(),
                terms_used: n,
                trunc_estimate: 0.0,
                converged: true,
            };
        }
    }
    SeriesEval {
        value: acc.value(),
        terms_used: terms.max(1),
        trunc_estimate: remainder_bound(last_env, q, terms),
        converged: false,
    }
}

/// Remainder after term `n` when envelopes decay like `n^(-3/2) q^n`.
fn remainder_bound(env: f64, q: f64, n: usize) -> f64 {
    let geometric = if q < 1.0 { q / (1.0 - q) } else { f64::INFINITY };
    env * geometric.min(2.0 * n as f64 + 2.0)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must lie in (0, 1), got {tol}")))
    }
}

/// Free density by the `x^(n-1)` expansion, `alpha < 1`, `0 <= x <= x*`.
pub fn free_density_power(p: &FreeStableParams, x: f64, tol: f64) -> Result<SeriesEval> {
    check_tol(tol)?;
    let xs = p.x_star()?;
    if !(0.0..=xs).contains(&x) {
        return Err(Error::domain(format!("x={x} outside [0, x*={xs}]")));
    }
    let gen = CoeffGen::new(p.alpha(), p.rho(), Expansion::Power);
    Ok(power_sum(&gen, (1..).map(|n| gen.at(n)), x, xs, tol))
}

pub(crate) fn power_sum(
    gen: &CoeffGen,
    coeffs: impl Iterator<Item = (f64, f64)>,
    x: f64,
    radius: f64,
    tol: f64,
) -> SeriesEval {
    if gen.vanishes() {
        return SeriesEval::exact(0.0);
    }
    if x == 0.0 {
        return SeriesEval::exact(sin_pi(gen.rho) / PI);
    }
    let q = x / radius;
    let mut ev = sum_normalized(coeffs, q, 0, tol);
    ev.value /= radius;
    ev.trunc_estimate /= radius;
    ev
}

/// Free density by the `x^(-αn-1)` expansion, `alpha < 1`, `x >= x*`.
pub fn free_density_tail(p: &FreeStableParams, x: f64, tol: f64) -> Result<SeriesEval> {
    check_tol(tol)?;
    let xs = p.x_star()?;
    if !(x >= xs) || !x.is_finite() {
        return Err(Error::domain(format!("x={x} below x*={xs}")));
    }
    let gen = CoeffGen::new(p.alpha(), p.rho(), Expansion::Tail);
    Ok(tail_sum(&gen, (1..).map(|n| gen.at(n)), x, xs, tol))
}

pub(crate) fn tail_sum(
    gen: &CoeffGen,
    coeffs: impl Iterator<Item = (f64, f64)>,
    x: f64,
    onset: f64,
    tol: f64,
) -> SeriesEval {
    if gen.vanishes() {
        return SeriesEval::exact(0.0);
    }
    let q = (onset / x).powf(gen.alpha);
    let mut ev = sum_normalized(coeffs, q, 1, tol);
    ev.value /= x;
    ev.trunc_estimate /= x;
    ev
}

/// Cached coefficient tables for one `(alpha, rho)` with `alpha < 1`.
#[derive(Debug, Clone)]
pub struct DensitySeries {
    params: FreeStableParams,
    x_star: f64,
    tail_gen: CoeffGen,
    power_gen: CoeffGen,
    tail: Vec<(f64, f64)>,
    power: Vec<(f64, f64)>,
}

impl DensitySeries {
    /// Precomputes enough terms for full double precision outside the band
    /// `|x - x*| <= 0.05 x*`; longer sums extend on the fly.
    pub fn new(p: FreeStableParams) -> Result<Self> {
        let x_star = p.x_star()?;
        let tail_gen = CoeffGen::new(p.alpha(), p.rho(), Expansion::Tail);
        let power_gen = CoeffGen::new(p.alpha(), p.rho(), Expansion::Power);
        let digits = 40.0;
        let n_tail = (digits / (p.alpha() * 1.05_f64.ln())).ceil() as usize;
        let n_power = (digits / -(0.95_f64.ln())).ceil() as usize;
        let tail = if tail_gen.vanishes() {
            Vec::new()
        } else {
            (1..=n_tail.min(TERM_CAP)).map(|n| tail_gen.at(n)).collect()
        };
        let power = if power_gen.vanishes() {
            Vec::new()
        } else {
            (1..=n_power.min(TERM_CAP)).map(|n| power_gen.at(n)).collect()
        };
        Ok(Self {
            params: p,
            x_star,
            tail_gen,
            power_gen,
            tail,
            power,
        })
    }

    pub fn params(&self) -> &FreeStableParams {
        &self.params
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    fn cached<'a>(
        table: &'a [(f64, f64)],
        gen: &'a CoeffGen,
    ) -> impl Iterator<Item = (f64, f64)> + 'a {
        table
            .iter()
            .copied()
            .chain((table.len() + 1..).map(move |n| gen.at(n)))
    }

    /// Density at `x >= 0`, choosing the expansion by `x` vs `x*`.
    pub fn density(&self, x: f64, tol: f64) -> SeriesEval {
        if x <= self.x_star {
            power_sum(
                &self.power_gen,
                Self::cached(&self.power, &self.power_gen),
                x,
                self.x_star,
                tol,
            )
        } else {
            tail_sum(
                &self.tail_gen,
                Self::cached(&self.tail, &self.tail_gen),
                x,
                self.x_star,
                tol,
            )
        }
    }
}

/// Convergent power-law expansion of a free stable density on
/// `[onset, inf)`, valid for both `alpha < 1` and `alpha > 1`, with its
/// antiderivative and derivatives.
#[derive(Debug, Clone)]
pub struct TailExpansion {
    alpha: f64,
    onset: f64,
    coeffs: Vec<f64>,
}

impl TailExpansion {
    /// Coefficients sufficient for double precision on `x >= x_min`,
    /// `x_min > onset`.
    pub fn new(p: &FreeStableParams, x_min: f64) -> Self {
        let alpha = p.alpha();
        let onset = p.tail_onset();
        let gen = CoeffGen::new(alpha, p.rho(), Expansion::Tail);
        if gen.vanishes() {
            return Self {
                alpha,
                onset,
                coeffs: Vec::new(),
            };
        }
        let q = (onset / x_min.max(onset * 1.01)).powf(alpha);
        let mut coeffs = Vec::new();
        let mut qp = q;
        let mut run = 0;
        for n in 1..=TERM_CAP {
            let (c, e) = gen.at(n);
            coeffs.push(c);
            if e * qp < 1e-18 * coeffs[0].abs().max(e) {
                run += 1;
                if run >= 3 {
                    break;
                }
            } else {
                run = 0;
            }
            qp *= q;
        }
        Self {
            alpha,
            onset,
            coeffs,
        }
    }

    pub fn onset(&self) -> f64 {
        self.onset
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn ratio(&self, x: f64) -> f64 {
        (self.onset / x).powf(self.alpha)
    }

    /// Density value `sum c_n x^(-αn-1)`.
    pub fn density(&self, x: f64) -> f64 {
        let q = self.ratio(x);
        let mut acc = Neumaier::default();
        let mut qp = q;
        for &c in &self.coeffs {
            acc.add(c * qp);
            qp *= q;
        }
        acc.value() / x
    }

    /// Mass beyond `x`: `sum c_n x^(-αn) / (αn)`.
    pub fn upper_mass(&self, x: f64) -> f64 {
        let q = self.ratio(x);
        let mut acc = Neumaier::default();
        let mut qp = q;
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc.add(c * qp / (self.alpha * (i + 1) as f64));
            qp *= q;
        }
        acc.value()
    }

    /// Tail mass as a function of `q = (onset/x)^α`, with `dT/dq`.
    pub fn mass_in_q(&self, q: f64) -> (f64, f64) {
        let mut t = Neumaier::default();
        let mut dt = Neumaier::default();
        let mut qp = 1.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let n = (i + 1) as f64;
            dt.add(c * qp / self.alpha);
            qp *= q;
            t.add(c * qp / (self.alpha * n));
        }
        (t.value(), dt.value())
    }

    pub fn q_of(&self, x: f64) -> f64 {
        self.ratio(x)
    }

    pub fn x_of_q(&self, q: f64) -> f64 {
        self.onset * q.powf(-1.0 / self.alpha)
    }

    /// Leading coefficient of the normalized expansion.
    pub fn leading(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// k-th derivative of the density at `x`.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        let q = self.ratio(x);
        let mut acc = Neumaier::default();
        let mut qp = q;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let beta = self.alpha * (i + 1) as f64 + 1.0;
            let mut rising = 1.0;
            for j in 0..k {
                rising *= beta + j as f64;
            }
            acc.add(c * qp * rising);
            qp *= q;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * acc.value() / x.powi(k as i32 + 1)
    }
}

/// Free characteristic function for `z >= 0`.
///
/// Terms are summed to full precision. Fails with [`Error::Precision`] when
/// the largest term exceeds `|value| / tol`.
pub fn free_cf_series(p: &FreeStableParams, z: f64, tol: f64) -> Result<SeriesEval<Complex>> {
    check_tol(tol)?;
    let (ev, max_term) = cf_series_raw(p, z)?;
    if max_term > ev.value.norm() / tol {
        return Err(Error::Precision {
            max_term,
            value: ev.value.norm(),
        });
    }
    Ok(SeriesEval {
        converged: ev.converged && ev.trunc_estimate <= tol,
        ..ev
    })
}

/// The characteristic function series summed to full precision, with the
/// magnitude of its largest term.
pub(crate) fn cf_series_raw(p: &FreeStableParams, z: f64) -> Result<(SeriesEval<Complex>, f64)> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("free_cf_series needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok((SeriesEval::exact(Complex::new(1.0, 0.0)), 1.0));
    }
    let a = p.alpha();
    let phase_step = a * (0.5 - p.rho());
    let ln_z = z.ln();
    let mut acc = NeumaierComplex::default();
    let mut max_term: f64 = 0.0;
    let mut prev_env = f64::INFINITY;
    let mut small_run = 0;
    let mut last_env = 0.0;
    let mut terms = 0;
    for n in 0..TERM_CAP {
        let nf = n as f64;
        let (ln_rec, rec_factor) = rec_gamma_split(2.0 + (a - 1.0) * nf);
        let env = (a * nf * ln_z - ln_gamma(nf + 1.0) + ln_rec).exp();
        let angle = phase_step * nf + nf;
        let mag = env * rec_factor;
        acc.add(Complex::new(mag * cos_pi(angle), mag * sin_pi(angle)));
        max_term = max_term.max(mag.abs());
        terms = n + 1;
        last_env = env;
        let s = acc.value().norm();
        if env <= f64::EPSILON * s && env <= prev_env {
            small_run += 1;
        } else {
            small_run = 0;
        }
        prev_env = env;
        if small_run >= 3 {
            break;
        }
    }
    let trunc = 2.0 * last_env;
    Ok((
        SeriesEval {
            value: acc.value(),
            terms_used: terms,
            trunc_estimate: trunc,
            converged: terms < TERM_CAP,
        },
        max_term,
    ))
}

/// Expansion mode for the classical density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalMode {
    Convergent,
    Asymptotic,
}

/// Classical strictly stable density at `x > 0`.
///
/// `alpha < 1` converges in powers `x^(-αn-1)` and is asymptotic in
/// `x^(n-1)` as `x -> 0`; for `alpha > 1` the roles swap.
pub fn classical_density_series(
    p: &FreeStableParams,
    x: f64,
    tol: f64,
    mode: ClassicalMode,
) -> Result<SeriesEval> {
    check_tol(tol)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "classical density series needs x > 0, got {x}"
        )));
    }
    let a = p.alpha();
    let use_tail = (a < 1.0) == (mode == ClassicalMode::Convergent);
    let ln_x = x.ln();
    // (ln envelope, trig factor) of term n
    let term = |n: usize| -> (f64, f64) {
        let nf = n as f64;
        if use_tail {
            (
                ln_gamma(1.0 + a * nf) - ln_gamma(nf + 1.0) - (a * nf + 1.0) * ln_x,
                sin_pi(nf * a * p.rho()),
            )
        } else {
            (
                ln_gamma(1.0 + nf / a) - ln_gamma(nf + 1.0) + (nf - 1.0) * ln_x,
                sin_pi(nf * p.rho()),
            )
        }
    };
    let vanishes = {
        let t = if use_tail { a * p.rho() } else { p.rho() };
        t == t.round()
    };
    if vanishes {
        return Ok(SeriesEval {
            value: 0.0,
            terms_used: 1,
            trunc_estimate: 0.0,
            converged: mode == ClassicalMode::Convergent,
        });
    }
    let sign = |n: usize| if n % 2 == 1 { 1.0 } else { -1.0 };

    match mode {
        ClassicalMode::Convergent => {
            let mut acc = Neumaier::default();
            let mut max_term: f64 = 0.0;
            let mut prev = f64::INFINITY;
            let mut run = 0;
            let mut last = 0.0;
            let mut terms = 0;
            for n in 1..=TERM_CAP {
                let (ln_env, trig) = term(n);
                let env = ln_env.exp() / PI;
                if !env.is_finite() {
                    return Err(Error::Precision {
                        max_term: env,
                        value: acc.value().abs(),
                    });
                }
                acc.add(sign(n) * trig * env);
                max_term = max_term.max(env * trig.abs());
                terms = n;
                last = env;
                let s = acc.value().abs();
                if env <= f64::EPSILON * s && env <= prev {
                    run += 1;
                } else {
                    run = 0;
                }
                prev = env;
                if run >= 3 {
                    break;
                }
            }
            let value = acc.value();
            if max_term > value.abs() / tol {
                return Err(Error::Precision {
                    max_term,
                    value: value.abs(),
                });
            }
            Ok(SeriesEval {
                value,
                terms_used: terms,
                trunc_estimate: 2.0 * last,
                converged: terms < TERM_CAP,
            })
        }
        ClassicalMode::Asymptotic => {
            let mut acc = Neumaier::default();
            let mut prev = f64::INFINITY;
            let mut terms = 0;
            for n in 1..=TERM_CAP {
                let (ln_env, trig) = term(n);
                let env = ln_env.exp() / PI;
                if env >= prev {
                    // the smallest term was the previous one
                    break;
                }
                if n > 1 {
                    let (ln_prev, trig_prev) = term(n - 1);
                    acc.add(sign(n - 1) * trig_prev * ln_prev.exp() / PI);
                }
                prev = env;
                terms = n;
                let _ = trig;
            }
            Ok(SeriesEval {
                value: acc.value(),
                terms_used: terms.saturating_sub(1).max(1),
                trunc_estimate: prev,
                converged: false,
            })
        }
    }
}

/// Density of the classical stable law at the origin: `Γ(1+1/α) sin(πρ)/π`.
pub fn classical_density_at_zero(p: &FreeStableParams) -> f64 {
    let (lg, _) = ln_gamma_sign(1.0 + 1.0 / p.alpha());
    lg.exp() * sin_pi(p.rho()) / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn p(a: f64, r: f64) -> FreeStableParams {
        make_params(a, r).unwrap()
    }

    #[test]
    fn power_series_at_origin() {
        let v = free_density_power(&p(0.5, 0.5), 0.0, 1e-14).unwrap();
        assert!((v.value - 1.0 / PI).abs() < 1e-16);
        for &(a, r) in &[(0.3, 0.2), (0.7, 0.9), (0.9, 0.5)] {
            let v = free_density_power(&p(a, r), 0.0, 1e-14).unwrap();
            assert!((v.value - sin_pi(r) / PI).abs() < 1e-16);
        }
    }

    #[test]
    fn positive_law_gap_is_exactly_zero() {
        let v = free_density_power(&p(0.5, 1.0), 0.2, 1e-14).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.converged);
    }

    #[test]
    fn tail_series_closed_forms() {
        let closed = |y: f64| (4.0 * y - 1.0).sqrt() / (2.0 * PI * y * y);
        let v = free_density_tail(&p(0.5, 1.0), 1.0, 1e-14).unwrap();
        assert!((v.value - 3.0_f64.sqrt() / (2.0 * PI)).abs() < 1e-13);
        assert!(v.converged);
        for &y in &[0.3, 0.5, 2.0, 17.0] {
            let v = free_density_tail(&p(0.5, 1.0), y, 1e-14).unwrap();
            assert!((v.value - closed(y)).abs() < 1e-12 * closed(y), "y={y}");
        }
        // at x* itself the sum converges only like n^(-1/2)
        let v = free_density_tail(&p(0.5, 1.0), 0.25, 1e-14).unwrap();
        assert!(!v.converged);
        assert!(v.value.abs() <= v.trunc_estimate + 1e-12);
    }

    #[test]
    fn tail_series_leading_behaviour() {
        let x = 100.0;
        let v = free_density_tail(&p(0.5, 1.0), x, 1e-15).unwrap().value;
        let lead = x.powf(-1.5) / PI;
        let dev = v / lead - 1.0;
        // the n=2 term vanishes; n=3 gives -Γ(5/2)/(6 Γ(1/2)) x^-1 = -1/(8x)
        assert!((dev + 1.0 / (8.0 * x)).abs() < 1e-5, "dev={dev}");
    }

    #[test]
    fn domain_errors() {
        assert!(free_density_power(&p(0.5, 0.5), 0.3, 1e-12).is_err());
        assert!(free_density_power(&p(1.5, 0.5), 0.1, 1e-12).is_err());
        assert!(free_density_tail(&p(0.5, 0.5), 0.2, 1e-12).is_err());
        assert!(classical_density_series(&p(0.5, 0.5), 0.0, 1e-12, ClassicalMode::Convergent).is_err());
        assert!(free_cf_series(&p(0.5, 0.5), -1.0, 1e-12).is_err());
    }

    #[test]
    fn boundary_consistency() {
        for &a in &[0.3, 0.5, 0.7, 0.9] {
            for &r in &[0.25, 0.5, 0.75, 1.0] {
                let pp = p(a, r);
                let xs = pp.x_star().unwrap();
                let lo = free_density_power(&pp, xs, 1e-12).unwrap();
                let hi = free_density_tail(&pp, xs, 1e-12).unwrap();
                let gap = (lo.value - hi.value).abs();
                assert!(
                    gap <= lo.trunc_estimate + hi.trunc_estimate,
                    "a={a} r={r} gap={gap:e} est={:e}",
                    lo.trunc_estimate + hi.trunc_estimate
                );
            }
        }
    }

    #[test]
    fn term_envelope_decays_like_n_to_minus_three_halves() {
        for &a in &[0.3, 0.5, 0.8] {
            let gen = CoeffGen::new(a, 0.5, Expansion::Tail);
            // at x = x* the normalized envelope is the term magnitude
            let pts: Vec<(f64, f64)> = (100..=2000)
                .step_by(19)
                .map(|n| ((n as f64).ln(), gen.at(n).1.ln()))
                .collect();
            let m = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let (mx, my) = (sx / m, sy / m);
            let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
            let slope = num / den;
            assert!((slope + 1.5).abs() < 0.2, "a={a} slope={slope}");
        }
    }

    #[test]
    fn cf_series_values() {
        let v = free_cf_series(&p(0.7, 0.3), 0.0, 1e-12).unwrap();
        assert_eq!(v.value, Complex::new(1.0, 0.0));
        // J1(2)/1 by its own series sum (-1)^k / (k! (k+1)!)
        let mut j = 0.0;
        let mut f = 1.0;
        for k in 0..30 {
            if k > 0 {
                f *= k as f64;
            }
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            j += s / (f * f * (k + 1) as f64);
        }
        let v = free_cf_series(&p(2.0, 0.5), 1.0, 1e-12).unwrap();
        assert!((v.value.re - j).abs() < 1e-15);
        assert!((v.value.re - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert!(v.value.im.abs() < 1e-15);
    }

    #[test]
    fn cf_series_bounded_by_one() {
        for &(a, r) in &[(0.3, 0.0), (0.5, 0.5), (0.9, 1.0), (1.5, 0.4), (2.0, 0.5)] {
            for k in 0..=20 {
                let z = 0.25 * k as f64;
                if let Ok(v) = free_cf_series(&p(a, r), z, 1e-8) {
                    assert!(v.value.norm() <= 1.0 + 1e-8, "a={a} r={r} z={z}");
                }
            }
        }
    }

    #[test]
    fn cf_series_reports_cancellation() {
        let e = free_cf_series(&p(2.0, 0.5), 40.0, 1e-8);
        assert!(matches!(e, Err(Error::Precision { .. })));
    }

    #[test]
    fn classical_closed_forms() {
        // Lévy law with CF exp(-sqrt(z) e^{-iπ/4})
        let levy = |x: f64| (-1.0 / (4.0 * x)).exp() * x.powf(-1.5) / (2.0 * PI.sqrt());
        let v = classical_density_series(&p(0.5, 1.0), 1.0, 1e-14, ClassicalMode::Convergent).unwrap();
        assert!((v.value - levy(1.0)).abs() < 1e-14);
        assert!((v.value - 0.219_695_644_733_861_3).abs() < 1e-12);
        // normal law with variance 2
        let gauss = |x: f64| (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
        let v = classical_density_series(&p(2.0, 0.5), 1.0, 1e-14, ClassicalMode::Convergent).unwrap();
        assert!((v.value - gauss(1.0)).abs() < 1e-14);
        assert!((classical_density_at_zero(&p(2.0, 0.5)) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-16);
    }

    #[test]
    fn classical_asymptotic_mode() {
        // small-x expansion of a non-degenerate alpha < 1 law vs its convergent series
        let pp = p(0.5, 0.5);
        for &x in &[0.01, 0.02] {
            let asym = classical_density_series(&pp, x, 1e-12, ClassicalMode::Asymptotic).unwrap();
            assert!(!asym.converged);
            let conv = classical_density_series(&pp, x, 1e-6, ClassicalMode::Convergent);
            if let Ok(conv) = conv {
                assert!((asym.value - conv.value).abs() <= asym.trunc_estimate + 1e-6 * conv.value.abs());
            }
        }
        // positive Lévy law: every term of the small-x expansion vanishes
        let v = classical_density_series(&p(0.5, 1.0), 0.01, 1e-12, ClassicalMode::Asymptotic).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn tail_expansion_matches_series() {
        let pp = p(0.5, 0.7);
        let t = TailExpansion::new(&pp, 0.5);
        for &x in &[0.5, 1.0, 10.0] {
            let s = free_density_tail(&pp, x, 1e-15).unwrap().value;
            assert!((t.density(x) - s).abs() < 1e-14 * s.abs().max(1e-3));
        }
        // semicircle: compact support beyond 2
        let t = TailExpansion::new(&p(2.0, 0.5), 3.0);
        assert!(t.is_zero());
        assert_eq!(t.density(3.0), 0.0);
    }

    #[test]
    fn tail_expansion_derivative_by_differences() {
        let pp = p(1.5, 0.5);
        let t = TailExpansion::new(&pp, 3.0);
        let x = 4.0;
        let h = 1e-4;
        let fd = (t.density(x + h) - t.density(x - h)) / (2.0 * h);
        assert!((t.derivative(x, 1) - fd).abs() < 1e-8 * fd.abs());
        let fd2 = (t.derivative(x + h, 1) - t.derivative(x - h, 1)) / (2.0 * h);
        assert!((t.derivative(x, 2) - fd2).abs() < 1e-7 * fd2.abs());
        // mass is the antiderivative
        let fdm = -(t.upper_mass(x + h) - t.upper_mass(x - h)) / (2.0 * h);
        assert!((fdm - t.density(x)).abs() < 1e-8 * t.density(x));
    }
}
