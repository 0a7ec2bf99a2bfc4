//! Kolmogorov-Smirnov statistics.

/// Asymptotic critical coefficient `c(a)` in `D > c(a) sqrt((n+m)/(nm))`.
pub fn critical_coefficient(significance: f64) -> f64 {
    (-0.5 * (0.5 * significance).ln()).sqrt()
}

/// Critical value of the two-sample statistic at the given significance.
pub fn critical_value_two_sample(n: usize, m: usize, significance: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    critical_coefficient(significance) * ((n + m) / (n * m)).sqrt()
}

/// Critical value of the one-sample statistic.
pub fn critical_value_one_sample(n: usize, significance: f64) -> f64 {
    critical_coefficient(significance) / (n as f64).sqrt()
}

/// `Q(λ) = 2 Σ (-1)^(k-1) exp(-2k²λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Approximate p-value of statistic `d` with effective size `n_eff`.
pub fn p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup |F_n - F|` for samples `xs` and a continuous CDF.
pub fn one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// `sup |F_n - G_m|` for two samples.
pub fn two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
