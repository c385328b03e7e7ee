//! Estimators on raw periodic-orbit data: per primitive orbit, its period and the
//! Birkhoff sum over one traversal.

use crate::error::{Error, Result};
use crate::maps::TraceWeight;
use crate::parallel::log_sum_exp;
use crate::poly::C64;

/// Primitive orbit data: periods, optional multipliers (for trace weights) and
/// the weighting rule.
#[derive(Debug, Clone, Copy)]
pub struct OrbitData<'a> {
    pub periods: &'a [usize],
    pub multipliers: Option<&'a [C64]>,
    pub weighting: TraceWeight,
}

impl<'a> OrbitData<'a> {
    pub fn max_period(&self) -> usize {
        self.periods.iter().copied().max().unwrap_or(0)
    }
}

/// log Z_m, Z_m = Σ_{σ^m x = x} e^{S_m φ(x)}.
pub fn log_partition(periods: &[usize], sums: &[f64], m: usize) -> f64 {
    let terms: Vec<f64> = periods
        .iter()
        .zip(sums)
        .filter(|(&p, _)| m % p == 0)
        .map(|(&p, &s)| (p as f64).ln() + (m / p) as f64 * s)
        .collect();
    log_sum_exp(&terms)
}

impl<'a> OrbitData<'a> {
    /// Periods only, unit trace weights.
    pub fn symbolic(periods: &'a [usize]) -> Self {
        Self {
            periods,
            multipliers: None,
            weighting: TraceWeight::Symbolic,
        }
    }
}

/// Normalized Gibbs weights of the period-n points, grouped by primitive orbit
/// (orbit i carries p_i points), as (orbit index, total weight) pairs.
pub fn gibbs_weights(data: OrbitData<'_>, sums: &[f64], n: usize) -> Vec<(usize, f64)> {
    let periods = data.periods;
    let idx: Vec<usize> = (0..periods.len()).filter(|&i| n % periods[i] == 0).collect();
    let logs: Vec<f64> = idx
        .iter()
        .map(|&i| (periods[i] as f64).ln() + (n / periods[i]) as f64 * sums[i])
        .collect();
    let z = log_sum_exp(&logs);
    idx.into_iter()
        .zip(logs)
        .map(|(i, l)| (i, (l - z).exp()))
        .collect()
}

/// Equilibrium average of an observable given by its primitive Birkhoff sums:
/// Σ w S_nψ / (n Σ w).
pub fn gibbs_mean(data: OrbitData<'_>, phi: &[f64], psi: &[f64], n: usize) -> f64 {
    gibbs_weights(data, phi, n)
        .iter()
        .fold(0.0, |acc, &(i, w)| acc + w * psi[i] / data.periods[i] as f64)
}

/// (1/n)·Σ w (S_nψ − n ψ̄)² / Σ w, with ψ̄ the Gibbs mean.
pub fn gibbs_variance(data: OrbitData<'_>, phi: &[f64], psi: &[f64], n: usize) -> (f64, f64) {
    let periods = data.periods;
    let w = gibbs_weights(data, phi, n);
    let mean = w
        .iter()
        .fold(0.0, |acc, &(i, wi)| acc + wi * psi[i] / periods[i] as f64);
    let var = w.iter().fold(0.0, |acc, &(i, wi)| {
        let s = (n / periods[i]) as f64 * psi[i] - n as f64 * mean;
        acc + wi * s * s
    }) / n as f64;
    (var, mean)
}

/// Weighted covariance of two observables at period n.
pub fn gibbs_covariance(data: OrbitData<'_>, phi: &[f64], psi1: &[f64], psi2: &[f64], n: usize) -> f64 {
    let periods = data.periods;
    let w = gibbs_weights(data, phi, n);
    let m1 = w.iter().fold(0.0, |a, &(i, wi)| a + wi * psi1[i] / periods[i] as f64);
    let m2 = w.iter().fold(0.0, |a, &(i, wi)| a + wi * psi2[i] / periods[i] as f64);
    w.iter().fold(0.0, |acc, &(i, wi)| {
        let r = (n / periods[i]) as f64;
        acc + wi * (r * psi1[i] - n as f64 * m1) * (r * psi2[i] - n as f64 * m2)
    }) / n as f64
}

/// Ratio estimate log(Z_{n+1}/Z_n).
pub fn ratio_pressure(periods: &[usize], sums: &[f64], n: usize) -> f64 {
    log_partition(periods, sums, n + 1) - log_partition(periods, sums, n)
}

fn trace_weight(weighting: TraceWeight, lam: Option<C64>, r: usize) -> f64 {
    match (weighting, lam) {
        (TraceWeight::Symbolic, _) | (_, None) => 1.0,
        (TraceWeight::Circle, Some(l)) => 1.0 / (1.0 - l.re.powi(-(r as i32))),
        (TraceWeight::Conformal, Some(l)) => {
            let inv = l.powi(-(r as i32));
            1.0 / (1.0 - inv).norm_sqr()
        }
    }
}

/// Coefficients of the truncated dynamical determinant and their derivatives with
/// respect to a parameter, from scaled traces.
fn det_coefficients(t: &[f64], dt: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = t.len();
    let mut c = vec![0.0; n + 1];
    let mut dc = vec![0.0; n + 1];
    c[0] = 1.0;
    for k in 1..=n {
        let mut s = 0.0;
        let mut ds = 0.0;
        for j in 1..=k {
            s += t[j - 1] * c[k - j];
            ds += dt[j - 1] * c[k - j] + t[j - 1] * dc[k - j];
        }
        c[k] = -s / k as f64;
        dc[k] = -ds / k as f64;
    }
    (c, dc)
}

fn poly_val_d(c: &[f64], u: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for &x in c.iter().rev() {
        dv = dv * u + v;
        v = v * u + x;
    }
    (v, dv)
}

/// Pressure from the cycle expansion, with its derivative along a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantPressure {
    pub pressure: f64,
    /// dP/dε for sums + ε·dsums.
    pub derivative: f64,
    pub truncation: usize,
}

/// P = −log z₀ where z₀ is the smallest positive zero of the truncated determinant
/// D_N(z) = exp(−Σ_{m ≤ N} T_m z^m / m) (expanded to degree N), with traces
/// T_m = Σ_{p | m} p·e^{(m/p) S_C}·w_C(m/p).
pub fn determinant_pressure(
    data: OrbitData<'_>,
    sums: &[f64],
    dsums: Option<&[f64]>,
    truncation: usize,
) -> Result<DeterminantPressure> {
    let periods = data.periods;
    let n = truncation.min(data.max_period());
    if n == 0 {
        return Err(Error::InvalidInput("empty orbit data".into()));
    }
    // Scale by the ratio estimate so the traces stay of order one.
    let p0 = if n >= 2 {
        log_partition(periods, sums, n) - log_partition(periods, sums, n - 1)
    } else {
        log_partition(periods, sums, 1)
    };
    let mut t = vec![0.0; n];
    let mut dt = vec![0.0; n];
    for m in 1..=n {
        let (mut s, mut ds) = (0.0, 0.0);
        for i in 0..periods.len() {
            let p = periods[i];
            if m % p != 0 {
                continue;
            }
            let r = m / p;
            let lam = data.multipliers.map(|l| l[i]);
            let w = p as f64 * (r as f64 * sums[i] - m as f64 * p0).exp() * trace_weight(data.weighting, lam, r);
            s += w;
            if let Some(d) = dsums {
                ds += w * r as f64 * d[i];
            }
        }
        t[m - 1] = s;
        dt[m - 1] = ds;
    }
    let (c, dc) = det_coefficients(&t, &dt);
    // First sign change of D on (0, 4], then bracketed Newton.
    let grid = 400;
    let (mut lo, mut hi) = (0.0, f64::NAN);
    let mut prev = poly_val_d(&c, 0.0).0;
    for k in 1..=grid {
        let u = 4.0 * k as f64 / grid as f64;
        let v = poly_val_d(&c, u).0;
        if v.signum() != prev.signum() || v == 0.0 {
            lo = 4.0 * (k - 1) as f64 / grid as f64;
            hi = u;
            break;
        }
        prev = v;
    }
    if hi.is_nan() {
        return Err(Error::Data("dynamical determinant has no zero near the ratio estimate".into()));
    }
    let sign_lo = poly_val_d(&c, lo).0.signum();
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = poly_val_d(&c, u);
        if v == 0.0 {
            break;
        }
        if v.signum() == sign_lo {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * u {
            u = next;
            break;
        }
        u = next;
    }
    let (_, du) = poly_val_d(&c, u);
    let de = poly_val_d(&dc, u).0;
    Ok(DeterminantPressure {
        pressure: p0 - u.ln(),
        derivative: de / (u * du),
        truncation: n,
    })
}
