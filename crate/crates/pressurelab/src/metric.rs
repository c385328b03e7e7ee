//! Hausdorff dimension through Bowen's equation, the Lyapunov functional, and the
//! pressure semi-norm on parameter paths of rational maps.

use crate::continuation::{dlog_from_samples, track_catalog, track_cycle, ParamPath};
use crate::error::{Error, Result};
use crate::maps::{
    certify_component, is_blaschke_point, tangent_decompose, Certification, CertifyOptions, CycleCatalog,
    QbPoint, RationalMap, Structure, TangentVector, TraceWeight,
};
use crate::parallel::par_map;
use crate::poly::C64;
use crate::thermo::estimators::{determinant_pressure, gibbs_mean, ratio_pressure, OrbitData};
use crate::thermo::{agree, covariance_from_sums, variance_from_sums, PathDerivative, VarianceOptions, VarianceReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionEstimator {
    /// Zero of the truncated dynamical determinant.
    Determinant,
    /// log(Z_{n+1}/Z_n).
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionOptions {
    pub estimator: DimensionEstimator,
    pub bracket: (f64, f64),
    /// Target |P| at the root.
    pub tol: f64,
    pub check_monotone: bool,
    /// Rows in the convergence table (truncations n − rows + 1 … n).
    pub table_rows: usize,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self {
            estimator: DimensionEstimator::Determinant,
            bracket: (0.5, 2.5),
            tol: 1e-12,
            check_monotone: true,
            table_rows: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub period: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub delta: f64,
    pub bracket: (f64, f64),
    pub period_used: usize,
    pub newton_iters: usize,
    /// |P(−δ·log|f′|)|.
    pub residual: f64,
    /// ∫log|f′| dm_δ.
    pub lyapunov: f64,
    pub estimator: DimensionEstimator,
    pub convergence: Vec<ConvergenceRow>,
    /// |δ_n − δ_{n−1}| from the convergence table.
    pub uncertainty: f64,
    pub warnings: Vec<String>,
}

/// Periods and multipliers of the primitive cycles used for one Bowen solve.
#[derive(Debug, Clone, Copy)]
struct CycleData<'a> {
    periods: &'a [usize],
    multipliers: &'a [C64],
    weighting: TraceWeight,
}

struct Bowen<'a> {
    data: CycleData<'a>,
    logs: Vec<f64>,
    neg_logs: Vec<f64>,
}

impl<'a> Bowen<'a> {
    fn new(data: CycleData<'a>) -> Result<Self> {
        let logs: Vec<f64> = data.multipliers.iter().map(|l| l.norm().ln()).collect();
        if let Some(i) = logs.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Domain(format!(
                "cycle {i} is not repelling (|multiplier| = {:.6})",
                data.multipliers[i].norm()
            )));
        }
        let neg_logs = logs.iter().map(|x| -x).collect();
        Ok(Self { data, logs, neg_logs })
    }

    /// P(−s·log|f′|) and its s-derivative.
    fn eval(&self, s: f64, n: usize, est: DimensionEstimator) -> Result<(f64, f64)> {
        let sums: Vec<f64> = self.logs.iter().map(|x| -s * x).collect();
        let p = self.data.periods;
        match est {
            DimensionEstimator::Determinant => {
                let od = OrbitData {
                    periods: p,
                    multipliers: Some(self.data.multipliers),
                    weighting: self.data.weighting,
                };
                let r = determinant_pressure(od, &sums, Some(&self.neg_logs), n)?;
                Ok((r.pressure, r.derivative))
            }
            DimensionEstimator::Ratio => {
                if p.iter().copied().max().unwrap_or(0) < n + 1 {
                    return Err(Error::InvalidInput(format!("ratio estimate needs cycles of period {}", n + 1)));
                }
                let val = ratio_pressure(p, &sums, n);
                let m1 = gibbs_mean(OrbitData::symbolic(p), &sums, &self.logs, n + 1);
                let m0 = gibbs_mean(OrbitData::symbolic(p), &sums, &self.logs, n);
                Ok((val, -((n + 1) as f64) * m1 + n as f64 * m0))
            }
        }
    }

    fn solve(&self, n: usize, opts: &DimensionOptions, check: bool) -> Result<(f64, f64, usize, f64, (f64, f64))> {
        let (lo0, hi0) = opts.bracket;
        let k = 10;
        let grid: Vec<f64> = (0..k).map(|i| lo0 + (hi0 - lo0) * i as f64 / (k - 1) as f64).collect();
        let vals: Vec<f64> = if check {
            grid.iter().map(|&s| self.eval(s, n, opts.estimator).map(|v| v.0)).collect::<Result<_>>()?
        } else {
            vec![self.eval(lo0, n, opts.estimator)?.0, self.eval(hi0, n, opts.estimator)?.0]
        };
        let (glo, ghi) = (vals[0], *vals.last().unwrap());
        if !(glo > 0.0 && ghi < 0.0) {
            return Err(Error::Bracket { lo: glo, hi: ghi });
        }
        let (mut lo, mut hi) = (lo0, hi0);
        if check {
            if vals.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Data("s -> P(-s log|f'|) is not strictly decreasing on the grid".into()));
            }
            let i = vals.iter().position(|&v| v <= 0.0).unwrap();
            lo = grid[i - 1];
            hi = grid[i];
        }
        self.newton(n, opts, lo, hi)
    }

    /// Root search starting from a bracket of width 2·step around `guess`,
    /// widened until it straddles the root; never leaves `opts.bracket`.
    fn solve_near(&self, n: usize, opts: &DimensionOptions, guess: f64, step: f64) -> Result<(f64, f64, usize, f64, (f64, f64))> {
        let (lo0, hi0) = opts.bracket;
        let mut w = step;
        loop {
            let lo = (guess - w).max(lo0);
            let hi = (guess + w).min(hi0);
            let glo = self.eval(lo, n, opts.estimator)?.0;
            let ghi = self.eval(hi, n, opts.estimator)?.0;
            if glo > 0.0 && ghi < 0.0 {
                return self.newton(n, opts, lo, hi);
            }
            if lo <= lo0 && hi >= hi0 {
                return Err(Error::Bracket { lo: glo, hi: ghi });
            }
            w *= 4.0;
        }
    }

    fn newton(&self, n: usize, opts: &DimensionOptions, mut lo: f64, mut hi: f64) -> Result<(f64, f64, usize, f64, (f64, f64))> {
        let mut s = 0.5 * (lo + hi);
        let mut iters = 0;
        let mut last = self.eval(s, n, opts.estimator)?;
        while iters < 100 {
            let (g, dg) = last;
            if g.abs() <= opts.tol {
                break;
            }
            if g > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - g / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            iters += 1;
            let step = (next - s).abs();
            s = next;
            last = self.eval(s, n, opts.estimator)?;
            if step <= 4.0 * f64::EPSILON * s {
                break;
            }
        }
        Ok((s, last.0.abs(), iters, -last.1, (lo, hi)))
    }
}

fn solve_dimension(data: CycleData<'_>, n: usize, opts: &DimensionOptions, quasi_circle: bool) -> Result<DimensionResult> {
    let bowen = Bowen::new(data)?;
    let (delta, residual, newton_iters, lyapunov, bracket) = bowen.solve(n, opts, opts.check_monotone)?;
    let mut warnings = Vec::new();
    let mut convergence = Vec::new();
    let first = n.saturating_sub(opts.table_rows.saturating_sub(1)).max(2);
    for k in first..n {
        if let Ok((d, ..)) = bowen.solve(k, opts, false) {
            convergence.push(ConvergenceRow { period: k, delta: d });
        }
    }
    convergence.push(ConvergenceRow { period: n, delta });
    let uncertainty = if convergence.len() >= 2 {
        (convergence[convergence.len() - 2].delta - delta).abs()
    } else {
        f64::NAN
    };
    if residual > 1e-10 {
        warnings.push(format!("Bowen residual {residual:.3e} above 1e-10"));
    }
    if quasi_circle && delta < 1.0 - 1e-9 {
        warnings.push(format!("dimension {delta:.12} below 1 for a map with a quasi-circle Julia set"));
    }
    Ok(DimensionResult {
        delta,
        bracket: (bracket.0.min(delta), bracket.1.max(delta)),
        period_used: n,
        newton_iters,
        residual,
        lyapunov,
        estimator: opts.estimator,
        convergence,
        uncertainty,
        warnings,
    })
}

fn has_quasi_circle(f: &RationalMap) -> bool {
    matches!(f.structure(), Structure::Blaschke { .. } | Structure::QuasiBlaschke(_))
}

/// Dimension from a catalog, truncating at period n.
pub fn dimension(catalog: &CycleCatalog, n: usize, opts: &DimensionOptions) -> Result<DimensionResult> {
    let (periods, mults) = catalog_arrays(catalog, n);
    solve_dimension(
        CycleData {
            periods: &periods,
            multipliers: &mults,
            weighting: catalog.weighting,
        },
        n,
        opts,
        has_quasi_circle(&catalog.map),
    )
}

/// Hausdorff dimension of the Julia set of a hyperbolic map from cycles up to period n.
pub fn hausdorff_dimension(f: &RationalMap, n: usize) -> Result<DimensionResult> {
    hausdorff_dimension_with(f, n, &DimensionOptions::default())
}

pub fn hausdorff_dimension_with(f: &RationalMap, n: usize, opts: &DimensionOptions) -> Result<DimensionResult> {
    let need = match opts.estimator {
        DimensionEstimator::Determinant => n,
        DimensionEstimator::Ratio => n + 1,
    };
    let catalog = CycleCatalog::build(f, need, None)?;
    dimension(&catalog, n, opts)
}

fn catalog_arrays(catalog: &CycleCatalog, n: usize) -> (Vec<usize>, Vec<C64>) {
    catalog
        .cycles
        .iter()
        .filter(|c| c.period <= n + 1)
        .map(|c| (c.period, c.multiplier))
        .unzip()
}

/// Ly(ν, g): base equilibrium weights of −δ_f·log|f′| at period n, applied to the
/// multipliers of the corresponding cycles of g.
pub fn lyapunov(base: &CycleCatalog, base_delta: f64, target: &CycleCatalog, n: usize) -> Result<f64> {
    if base.cycles.len() != target.cycles.len()
        || base.cycles.iter().zip(&target.cycles).any(|(a, b)| a.period != b.period)
    {
        return Err(Error::InvalidInput("target catalog does not correspond to the base catalog".into()));
    }
    let periods: Vec<usize> = base.cycles.iter().map(|c| c.period).collect();
    let phi: Vec<f64> = base.cycles.iter().map(|c| -base_delta * c.multiplier.norm().ln()).collect();
    let mults: Vec<C64> = base.cycles.iter().map(|c| c.multiplier).collect();
    let logs: Vec<f64> = target.cycles.iter().map(|c| c.multiplier.norm().ln()).collect();
    let data = OrbitData {
        periods: &periods,
        multipliers: Some(&mults),
        weighting: base.weighting,
    };
    Ok(gibbs_mean(data, &phi, &logs, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GValue {
    pub delta_f: f64,
    pub delta_g: f64,
    pub lyapunov: f64,
    /// δ(g)·Ly(ν, g).
    pub value: f64,
}

/// G_f(g) for g = path(t), where the path starts at f and `base` is f's catalog.
pub fn g_function(base: &CycleCatalog, base_delta: f64, path: &ParamPath, t: f64, n: usize) -> Result<GValue> {
    let target = if t == 0.0 {
        base.clone()
    } else {
        track_catalog(path, base, t)?
    };
    let delta_g = if t == 0.0 {
        base_delta
    } else {
        dimension(&target, n, &DimensionOptions::default())?.delta
    };
    let ly = lyapunov(base, base_delta, &target, n)?;
    Ok(GValue {
        delta_f: base_delta,
        delta_g,
        lyapunov: ly,
        value: delta_g * ly,
    })
}

/// Multipliers of every base cycle tracked to t = ±h, ±h/2, and the dimension at
/// each of these parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSweep {
    pub h: f64,
    pub period: usize,
    /// −h, −h/2, 0, h/2, h.
    pub grid: [f64; 5],
    pub delta: [f64; 5],
    /// Richardson-refined central difference of δ.
    pub delta_rate: f64,
    /// Plain central difference at step h.
    pub delta_rate_coarse: f64,
    /// Derivative of the Bowen root of the estimator itself (no differencing).
    pub delta_rate_implicit: f64,
    pub periods: Vec<usize>,
    pub multipliers: Vec<C64>,
    /// d/dt log λ_C, None when tracking failed.
    pub dlog: Vec<Option<C64>>,
    pub failures: Vec<(usize, String)>,
    pub weighting: TraceWeight,
}

impl PathSweep {
    pub fn base_delta(&self) -> f64 {
        self.delta[2]
    }

    /// d/dt[δ·log|λ_C|] per cycle (None where tracking failed).
    pub fn entries(&self) -> Vec<Option<f64>> {
        let rate = if self.delta_rate.is_finite() {
            self.delta_rate
        } else {
            self.delta_rate_implicit
        };
        self.dlog
            .iter()
            .zip(&self.multipliers)
            .map(|(d, l)| d.map(|d| rate * l.norm().ln() + self.base_delta() * d.re))
            .collect()
    }

    fn orbit_data(&self) -> OrbitData<'_> {
        OrbitData {
            periods: &self.periods,
            multipliers: Some(&self.multipliers),
            weighting: self.weighting,
        }
    }

    /// Birkhoff sums of the normalized base potential −δ₀·log|f₀′|.
    fn phi(&self) -> Vec<f64> {
        self.multipliers.iter().map(|l| -self.base_delta() * l.norm().ln()).collect()
    }
}

/// Tracks the cycles of `base` (period ≤ n) along the path and differentiates.
/// With `tolerate`, cycles that fail to track are recorded instead of aborting.
pub fn sweep(path: &ParamPath, base: &CycleCatalog, n: usize, h: f64, tolerate: bool) -> Result<PathSweep> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("step h must be positive".into()));
    }
    let cycles: Vec<&crate::maps::Cycle> = base.cycles.iter().filter(|c| c.period <= n).collect();
    let periods: Vec<usize> = cycles.iter().map(|c| c.period).collect();
    let multipliers: Vec<C64> = cycles.iter().map(|c| c.multiplier).collect();
    let tracks: Vec<Result<[C64; 5]>> = par_map(&cycles, |c| {
        let fwd = track_cycle(path, c, &[0.0, h / 2.0, h])?;
        let bwd = track_cycle(path, c, &[0.0, -h / 2.0, -h])?;
        Ok([
            bwd.multipliers[2],
            bwd.multipliers[1],
            c.multiplier,
            fwd.multipliers[1],
            fwd.multipliers[2],
        ])
    });
    let mut failures = Vec::new();
    let mut samples: Vec<Option<[C64; 5]>> = Vec::with_capacity(tracks.len());
    let mut dlog = Vec::with_capacity(tracks.len());
    for (i, r) in tracks.into_iter().enumerate() {
        match r.and_then(|m| dlog_from_samples(m[2], m[0], m[1], m[3], m[4], h).map(|d| (m, d))) {
            Ok((m, d)) => {
                samples.push(Some(m));
                dlog.push(Some(d.derivative));
            }
            Err(e) => {
                if !tolerate {
                    return Err(e);
                }
                failures.push((i, e.to_string()));
                samples.push(None);
                dlog.push(None);
            }
        }
    }
    let opts = DimensionOptions {
        check_monotone: false,
        table_rows: 1,
        ..Default::default()
    };
    let grid = [-h, -h / 2.0, 0.0, h / 2.0, h];
    let base_data = CycleData {
        periods: &periods,
        multipliers: &multipliers,
        weighting: base.weighting,
    };
    let bowen0 = Bowen::new(base_data)?;
    let (delta0, ..) = bowen0.solve(n, &opts, true)?;
    let mut delta = [f64::NAN; 5];
    delta[2] = delta0;
    if failures.is_empty() {
        for (k, &t) in grid.iter().enumerate() {
            if k == 2 {
                continue;
            }
            let f = path.map_at(t)?;
            let m: Vec<C64> = samples.iter().map(|s| s.unwrap()[k]).collect();
            let data = CycleData {
                periods: &periods,
                multipliers: &m,
                weighting: f.trace_weighting(),
            };
            delta[k] = Bowen::new(data)?.solve_near(n, &opts, delta0, 1e-2)?.0;
        }
    }
    let coarse = (delta[4] - delta[0]) / (2.0 * h);
    let fine = (delta[3] - delta[1]) / h;
    // implicit derivative: dδ/dt = −(∂P/∂t)/(∂P/∂s) at s = δ₀
    let sums: Vec<f64> = bowen0.logs.iter().map(|x| -delta0 * x).collect();
    let dsums: Vec<f64> = dlog
        .iter()
        .map(|d| d.map_or(0.0, |d| -delta0 * d.re))
        .collect();
    let od = OrbitData {
        periods: &periods,
        multipliers: Some(&multipliers),
        weighting: base.weighting,
    };
    let dp_dt = determinant_pressure(od, &sums, Some(&dsums), n)?.derivative;
    let dp_ds = determinant_pressure(od, &sums, Some(&bowen0.neg_logs), n)?.derivative;
    Ok(PathSweep {
        h,
        period: n,
        grid,
        delta,
        delta_rate: (4.0 * fine - coarse) / 3.0,
        delta_rate_coarse: coarse,
        delta_rate_implicit: -dp_dt / dp_ds,
        periods,
        multipliers,
        dlog,
        failures,
        weighting: base.weighting,
    })
}

/// Default step for the metric sweeps; the dimension at ±h comes from truncated
/// determinants, so smaller steps amplify their truncation error.
pub const DEFAULT_SWEEP_H: f64 = 1e-3;

/// Absolute floor below which seminorm estimates count as zero.
pub const SEMINORM_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleDerivative {
    pub period: usize,
    pub multiplier: [f64; 2],
    pub dlog: [f64; 2],
    /// d/dt[δ·log|λ_C|]; the Birkhoff sum of ψ is its negative.
    pub entry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormResult {
    /// ‖v‖²_P.
    pub value: f64,
    pub variance: f64,
    /// δ₀·Ly = −∫φ₀ dm.
    pub denominator: f64,
    pub base_dimension: f64,
    pub dimension_rate: f64,
    pub dimension_rate_implicit: f64,
    /// Finite-difference-of-pressure estimate of ‖v‖²_P.
    pub cross_check: Option<f64>,
    /// Value at period n − 2.
    pub coarse_value: f64,
    pub uncertainty: f64,
    pub period: usize,
    pub h: f64,
    pub cycles: Vec<CycleDerivative>,
    pub variance_report: VarianceReport,
}

fn cycle_table(sw: &PathSweep) -> Vec<CycleDerivative> {
    sw.entries()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let l = sw.multipliers[i];
            let d = sw.dlog[i].unwrap_or(C64::new(f64::NAN, f64::NAN));
            CycleDerivative {
                period: sw.periods[i],
                multiplier: [l.re, l.im],
                dlog: [d.re, d.im],
                entry: e.unwrap_or(f64::NAN),
            }
        })
        .collect()
}

fn seminorm_from_sweep(sw: &PathSweep, rel_tol: f64) -> Result<SeminormResult> {
    let n = sw.period;
    let phi = sw.phi();
    let psi: Vec<f64> = sw.entries().iter().map(|e| -e.unwrap_or(f64::NAN)).collect();
    let denominator = -gibbs_mean(sw.orbit_data(), &phi, &phi, n);
    if !(denominator > 0.0) {
        return Err(Error::NonpositiveDenominator(denominator));
    }
    let opts = VarianceOptions {
        h: None,
        rel_tol,
        abs_tol: SEMINORM_FLOOR * denominator,
        cross_check: true,
    };
    let var = variance_from_sums(sw.orbit_data(), &phi, &psi, n, &opts)?;
    let coarse_n = n.saturating_sub(2).max(1);
    let coarse = variance_from_sums(
        sw.orbit_data(),
        &phi,
        &psi,
        coarse_n,
        &VarianceOptions {
            cross_check: false,
            ..opts
        },
    )?;
    let value = var.variance / denominator;
    let coarse_value = coarse.variance / denominator;
    Ok(SeminormResult {
        value,
        variance: var.variance,
        denominator,
        base_dimension: sw.base_delta(),
        dimension_rate: sw.delta_rate,
        dimension_rate_implicit: sw.delta_rate_implicit,
        cross_check: var.finite_difference.map(|f| f / denominator),
        coarse_value,
        uncertainty: (value - coarse_value).abs(),
        period: n,
        h: sw.h,
        cycles: cycle_table(sw),
        variance_report: var,
    })
}

/// Catalog of the map at the start of a path.
pub fn base_catalog(path: &ParamPath, n: usize) -> Result<CycleCatalog> {
    CycleCatalog::build(&path.map_at(0.0)?, n, None)
}

/// ‖v‖²_P for the tangent of `path` at t = 0.
pub fn pressure_seminorm(path: &ParamPath, n: usize, h: f64) -> Result<SeminormResult> {
    let base = base_catalog(path, n)?;
    pressure_seminorm_on(path, &base, n, h)
}

pub fn pressure_seminorm_on(path: &ParamPath, base: &CycleCatalog, n: usize, h: f64) -> Result<SeminormResult> {
    let sw = sweep(path, base, n, h, false)?;
    seminorm_from_sweep(&sw, 1e-2)
}

/// The normalized geometric potential's path derivative, for use as a potential.
pub fn path_derivative(path: &ParamPath, n: usize, h: f64) -> Result<PathDerivative> {
    let base = base_catalog(path, n)?;
    let sw = sweep(path, &base, n, h, false)?;
    Ok(PathDerivative {
        path: path.clone(),
        h,
        base_dimension: sw.base_delta(),
        dimension_rate: sw.delta_rate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormResult {
    /// ⟨v₁, v₂⟩_P.
    pub value: f64,
    pub covariance: f64,
    pub denominator: f64,
    pub first: f64,
    pub second: f64,
    pub period: usize,
}

fn same_base(p1: &ParamPath, p2: &ParamPath) -> Result<bool> {
    let (f, g) = (p1.map_at(0.0)?, p2.map_at(0.0)?);
    let close = |a: &[C64], b: &[C64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 1e-12 * (1.0 + x.norm()))
    };
    Ok(close(f.numerator(), g.numerator()) && close(f.denominator(), g.denominator()))
}

/// Pressure form of two paths through the same base map, from one shared sweep
/// of base cycles.
pub fn pressure_form(p1: &ParamPath, p2: &ParamPath, n: usize, h: f64) -> Result<FormResult> {
    if !same_base(p1, p2)? {
        return Err(Error::InvalidInput("paths start at different maps".into()));
    }
    let base = base_catalog(p1, n)?;
    let s1 = sweep(p1, &base, n, h, false)?;
    let s2 = sweep(p2, &base, n, h, false)?;
    let phi = s1.phi();
    let psi1: Vec<f64> = s1.entries().iter().map(|e| -e.unwrap()).collect();
    let psi2: Vec<f64> = s2.entries().iter().map(|e| -e.unwrap()).collect();
    let denominator = -gibbs_mean(s1.orbit_data(), &phi, &phi, n);
    if !(denominator > 0.0) {
        return Err(Error::NonpositiveDenominator(denominator));
    }
    let opts = VarianceOptions {
        h: None,
        rel_tol: 1e-2,
        abs_tol: SEMINORM_FLOOR * denominator,
        cross_check: true,
    };
    let cov = covariance_from_sums(s1.orbit_data(), &phi, &psi1, &psi2, n, &opts)?;
    Ok(FormResult {
        value: cov.covariance / denominator,
        covariance: cov.covariance,
        denominator,
        first: cov.first.variance / denominator,
        second: cov.second.variance / denominator,
        period: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Degenerate,
    Nondegenerate,
    Inconclusive,
}

pub const TOL_DEG: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub verdict: Verdict,
    pub max_entry: f64,
    pub tol_deg: f64,
    pub period: usize,
    pub h: f64,
    pub tracked: usize,
    pub failed: usize,
    pub base_dimension: f64,
    pub dimension_rate: f64,
    pub cycles: Vec<CycleDerivative>,
    pub failures: Vec<(usize, String)>,
}

/// Per-cycle d/dt[δ·log|λ_C|] along the path and the resulting degeneracy verdict.
pub fn degeneracy_scan(path: &ParamPath, n: usize, h: f64, tol_deg: f64) -> Result<ScanReport> {
    let base = base_catalog(path, n.max(SCAN_DIMENSION_PERIOD))?;
    degeneracy_scan_on(path, &base, n, h, tol_deg)
}

/// Truncation used for the dimension and its rate during scans; the table of
/// entries still stops at the requested period.
pub const SCAN_DIMENSION_PERIOD: usize = 14;

/// Entries are reported for cycles of period ≤ n; δ and dδ/dt use every cycle
/// in `base`.
pub fn degeneracy_scan_on(path: &ParamPath, base: &CycleCatalog, n: usize, h: f64, tol_deg: f64) -> Result<ScanReport> {
    if base.max_period < n {
        return Err(Error::InvalidInput(format!(
            "base catalog stops at period {} < {n}",
            base.max_period
        )));
    }
    let sw = sweep(path, base, base.max_period, h, true)?;
    let total = sw.periods.len();
    let failed = sw.failures.len();
    if (total - failed) * 10 < total * 9 {
        return Err(Error::Tracking {
            t_fail: h,
            last_good: 0.0,
            reason: format!("{failed} of {total} cycles failed to track: {}", sw.failures[0].1),
        });
    }
    let max_entry = sw
        .entries()
        .iter()
        .zip(&sw.periods)
        .filter(|(_, &p)| p <= n)
        .filter_map(|(e, _)| *e)
        .fold(0.0f64, |m, e| m.max(e.abs()));
    let cycles = cycle_table(&sw).into_iter().filter(|c| c.period <= n).collect();
    Ok(ScanReport {
        verdict: verdict(max_entry, tol_deg),
        max_entry,
        tol_deg,
        period: n,
        h,
        tracked: total - failed,
        failed,
        base_dimension: sw.base_delta(),
        dimension_rate: if sw.delta_rate.is_finite() {
            sw.delta_rate
        } else {
            sw.delta_rate_implicit
        },
        cycles,
        failures: sw.failures,
    })
}

fn verdict(max_entry: f64, tol: f64) -> Verdict {
    if max_entry < tol {
        Verdict::Degenerate
    } else if max_entry > 10.0 * tol {
        Verdict::Nondegenerate
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionCheck {
    pub direction: TangentVector,
    pub verdict: Verdict,
    pub max_entry: f64,
    /// True when the direction lies in J·T B (Blaschke points only).
    pub pure_j: Option<bool>,
    /// ‖w₁‖²_P of the T B-component (Blaschke points only).
    pub tb_seminorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub point: QbPoint,
    pub certification: Certification,
    pub blaschke: bool,
    pub dimension: DimensionResult,
    pub nonreal_multiplier: bool,
    pub period: usize,
    pub tol_deg: f64,
    pub directions: Vec<DirectionCheck>,
    pub assertions: Vec<Assertion>,
}

impl TheoremReport {
    /// Fail if any assertion failed, Inconclusive if some were inconclusive.
    pub fn outcome(&self) -> Status {
        if self.assertions.iter().any(|a| a.status == Status::Fail) {
            Status::Fail
        } else if self.assertions.iter().any(|a| a.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

/// The eight default probe directions (da, db) = (u·1, v·1).
pub fn default_directions(len: usize) -> Vec<TangentVector> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    [(one, z), (z, one), (one, one), (i, i), (one, i), (i, one), (i, z), (z, i)]
        .iter()
        .map(|&(u, v)| TangentVector::new(vec![u; len], vec![v; len]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremOptions {
    pub period: usize,
    pub h: f64,
    pub tol_deg: f64,
    /// Lower bound on ‖·‖²_P over sampled T B directions for the conditional check.
    pub tb_tol: f64,
    pub certify: CertifyOptions,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        Self {
            period: 8,
            h: DEFAULT_SWEEP_H,
            tol_deg: TOL_DEG,
            tb_tol: SEMINORM_FLOOR,
            certify: CertifyOptions::default(),
        }
    }
}

fn assertion(name: &str, status: Status, detail: String) -> Assertion {
    Assertion {
        name: name.into(),
        status,
        detail,
    }
}

/// Checks the degeneracy structure of the pressure semi-norm at a point of the
/// normal-form space: nondegenerate with δ > 1 off the Blaschke locus, degenerate
/// exactly along J-directions on it.
pub fn theorem_main_check(point: &QbPoint, directions: &[TangentVector], opts: &TheoremOptions) -> Result<TheoremReport> {
    if directions.iter().any(|v| v.is_zero()) {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    let certification = certify_component(point, &opts.certify)?;
    if let Certification::CertifiedFalse { reason } = &certification {
        return Err(Error::InvalidInput(format!("point is outside the component: {reason}")));
    }
    let mut assertions = Vec::new();
    if !certification.is_certified() {
        assertions.push(assertion(
            "validated",
            Status::Inconclusive,
            "component membership not certified".into(),
        ));
    }
    let blaschke = point.on_locus_entrywise(1e-9) || is_blaschke_point(point, 1e-9)?.is_some();
    let n = opts.period;
    let f = crate::maps::qb(point)?;
    let base = CycleCatalog::build(&f, n.max(SCAN_DIMENSION_PERIOD), None)?;
    let dim = dimension(&base, base.max_period, &DimensionOptions::default())?;
    let nonreal = base
        .cycles
        .iter()
        .any(|c| c.repelling && c.multiplier.im.abs() > 1e-8 * c.multiplier.norm());
    let mut checks = Vec::with_capacity(directions.len());
    for v in directions {
        let path = ParamPath::tangent(point.clone(), v.clone());
        let (verdict, max_entry) = match degeneracy_scan_on(&path, &base, n, opts.h, opts.tol_deg) {
            Ok(r) => (r.verdict, r.max_entry),
            Err(e) => {
                assertions.push(assertion(
                    "scan",
                    Status::Inconclusive,
                    format!("direction {v:?}: {e}"),
                ));
                (Verdict::Inconclusive, f64::NAN)
            }
        };
        let (pure_j, tb_seminorm) = if blaschke && point.on_locus_entrywise(1e-9) {
            let (w1, _) = tangent_decompose(point, v, 1e-9)?;
            if w1.norm() <= 1e-12 * v.norm() {
                (Some(true), Some(0.0))
            } else {
                let p = ParamPath::tangent(point.clone(), w1);
                let s = pressure_seminorm_on(&p, &base, base.max_period, opts.h).map(|r| r.value).ok();
                (Some(false), s)
            }
        } else {
            (None, None)
        };
        checks.push(DirectionCheck {
            direction: v.clone(),
            verdict,
            max_entry,
            pure_j,
            tb_seminorm,
        });
    }
    if !blaschke {
        let status = if dim.delta > 1.0 + 1e-5 { Status::Pass } else { Status::Fail };
        assertions.push(assertion(
            "dimension_above_one",
            status,
            format!("delta = {:.12}", dim.delta),
        ));
        for c in &checks {
            let status = match c.verdict {
                Verdict::Nondegenerate => Status::Pass,
                Verdict::Degenerate => Status::Fail,
                Verdict::Inconclusive => Status::Inconclusive,
            };
            assertions.push(assertion(
                "nondegenerate_off_locus",
                status,
                format!("direction {}: max entry {:.3e}", fmt_dir(&c.direction), c.max_entry),
            ));
        }
    } else {
        for c in checks.iter().filter(|c| c.pure_j == Some(true)) {
            let status = match c.verdict {
                Verdict::Degenerate => Status::Pass,
                Verdict::Nondegenerate => Status::Fail,
                Verdict::Inconclusive => Status::Inconclusive,
            };
            assertions.push(assertion(
                "j_direction_degenerate",
                status,
                format!("direction {}: max entry {:.3e}", fmt_dir(&c.direction), c.max_entry),
            ));
        }
        let tb: Vec<f64> = checks
            .iter()
            .filter(|c| c.pure_j == Some(false))
            .filter_map(|c| c.tb_seminorm)
            .collect();
        let bounded = !tb.is_empty() && tb.iter().all(|&s| s > opts.tb_tol);
        if bounded {
            for c in checks.iter().filter(|c| c.verdict == Verdict::Degenerate) {
                let s = c.tb_seminorm.unwrap_or(f64::NAN);
                let status = if s < opts.tb_tol { Status::Pass } else { Status::Fail };
                assertions.push(assertion(
                    "degenerate_implies_j_direction",
                    status,
                    format!("direction {}: T B-component seminorm {s:.3e}", fmt_dir(&c.direction)),
                ));
            }
        } else {
            assertions.push(assertion(
                "degenerate_implies_j_direction",
                Status::Inconclusive,
                "restricted seminorm on sampled T B directions not bounded below; hypothesis not met".into(),
            ));
        }
    }
    Ok(TheoremReport {
        point: point.clone(),
        certification,
        blaschke,
        dimension: dim,
        nonreal_multiplier: nonreal,
        period: n,
        tol_deg: opts.tol_deg,
        directions: checks,
        assertions,
    })
}

fn fmt_dir(v: &TangentVector) -> String {
    let f = |z: &C64| format!("{}{:+}i", z.re, z.im);
    format!(
        "(da = [{}], db = [{}])",
        v.da.iter().map(f).collect::<Vec<_>>().join(", "),
        v.db.iter().map(f).collect::<Vec<_>>().join(", ")
    )
}

/// Second difference of t ↦ G_f(path(t)) at 0, for comparison with the pressure
/// form times δ·Ly.
pub fn g_second_difference(path: &ParamPath, n: usize, h: f64) -> Result<f64> {
    let base = base_catalog(path, n)?;
    let d0 = dimension(&base, n, &DimensionOptions::default())?.delta;
    let g0 = g_function(&base, d0, path, 0.0, n)?.value;
    let gp = g_function(&base, d0, path, h, n)?.value;
    let gm = g_function(&base, d0, path, -h, n)?.value;
    Ok((gp - 2.0 * g0 + gm) / (h * h))
}

/// Seminorm values agree within 1e-2 relative, or both below the floor.
pub fn seminorms_agree(a: f64, b: f64) -> bool {
    agree(a, b, 1e-2, SEMINORM_FLOOR)
}

#[cfg(test)]
mod tests;
