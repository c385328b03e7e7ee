//! Pressure, equilibrium averages, variance and the pressure norm, all evaluated as
//! weighted sums over periodic orbits.

pub mod estimators;
mod potential;

pub use potential::{CylinderTable, LinearTerm, Orbit, PathDerivative, Potential, PotentialSpec};

use crate::error::{Error, Result};
use crate::maps::{CycleCatalog, TraceWeight};
use crate::parallel::par_map;
use crate::poly::C64;
use crate::symbolic::{enumerate_cylinders, is_aperiodic, primitive_orbits, SubshiftSpec, Word, DEFAULT_CAP};
use estimators::{determinant_pressure, gibbs_covariance, gibbs_variance, log_partition, OrbitData};
use serde::Serialize;
use std::collections::HashMap;

/// Warn when successive ratio estimates differ by more than this.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Primitive periodic orbits of a system up to some period.
#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    Symbolic { spec: SubshiftSpec, words: Vec<Word> },
    Map { catalog: CycleCatalog, multipliers: Vec<C64> },
}

impl Ensemble {
    /// Primitive orbits of an aperiodic subshift with period ≤ max_period.
    pub fn symbolic(spec: &SubshiftSpec, max_period: usize) -> Result<Self> {
        if is_aperiodic(spec).is_none() {
            return Err(Error::InvalidInput("subshift is not aperiodic (mixing)".into()));
        }
        Ok(Ensemble::Symbolic {
            spec: spec.clone(),
            words: primitive_orbits(spec, max_period, DEFAULT_CAP)?,
        })
    }

    pub fn map(catalog: CycleCatalog) -> Self {
        let multipliers = catalog.cycles.iter().map(|c| c.multiplier).collect();
        Ensemble::Map { catalog, multipliers }
    }

    /// The natural ensemble for a potential: its subshift or its map's cycle catalog.
    pub fn for_potential(phi: &Potential, max_period: usize) -> Result<Self> {
        if let Some(spec) = phi.subshift() {
            Self::symbolic(spec, max_period)
        } else if let Some(f) = phi.map() {
            Ok(Self::map(CycleCatalog::build(f, max_period, None)?))
        } else {
            Err(Error::InvalidInput(
                "potential has no underlying subshift or map; supply an ensemble".into(),
            ))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Ensemble::Symbolic { words, .. } => words.len(),
            Ensemble::Map { catalog, .. } => catalog.cycles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_period(&self) -> usize {
        self.periods().into_iter().max().unwrap_or(0)
    }

    pub fn periods(&self) -> Vec<usize> {
        match self {
            Ensemble::Symbolic { words, .. } => words.iter().map(|w| w.len()).collect(),
            Ensemble::Map { catalog, .. } => catalog.cycles.iter().map(|c| c.period).collect(),
        }
    }

    pub fn orbit(&self, i: usize) -> Orbit<'_> {
        match self {
            Ensemble::Symbolic { words, .. } => Orbit::Word(&words[i]),
            Ensemble::Map { catalog, .. } => Orbit::Cycle(&catalog.cycles[i]),
        }
    }

    pub fn weighting(&self) -> TraceWeight {
        match self {
            Ensemble::Symbolic { .. } => TraceWeight::Symbolic,
            Ensemble::Map { catalog, .. } => catalog.weighting,
        }
    }

    pub fn multipliers(&self) -> Option<&[C64]> {
        match self {
            Ensemble::Symbolic { .. } => None,
            Ensemble::Map { multipliers, .. } => Some(multipliers),
        }
    }

    /// Birkhoff sums of φ over each primitive orbit, in ensemble order.
    pub fn sums(&self, phi: &Potential) -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..self.len()).collect();
        par_map(&idx, |&i| phi.birkhoff_sum(self.orbit(i))).into_iter().collect()
    }

    /// −log|λ_C| per cycle (zero-cost geometric sums at s = 1).
    pub fn log_multipliers(&self) -> Option<Vec<f64>> {
        self.multipliers().map(|m| m.iter().map(|l| l.norm().ln()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Orbit,
    Matrix,
    Determinant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumStats {
    pub pressure: f64,
    /// ∫φ dm.
    pub mean_energy: f64,
    pub entropy: f64,
    pub orbit_period_used: usize,
    pub estimator: EstimatorKind,
    /// |log(Z_{n+1}/Z_n) − log(Z_n/Z_{n−1})|.
    pub convergence_gap: f64,
    pub warnings: Vec<String>,
}

fn require_period(periods: &[usize], n: usize) -> Result<()> {
    let max = periods.iter().copied().max().unwrap_or(0);
    if n == 0 || max < n + 1 {
        return Err(Error::InvalidInput(format!(
            "ratio estimate at period {n} needs orbits up to period {}, have {max}",
            n + 1
        )));
    }
    Ok(())
}

/// Ratio estimator on precomputed Birkhoff sums.
pub fn stats_from_sums(periods: &[usize], sums: &[f64], n: usize, tol: f64) -> Result<EquilibriumStats> {
    require_period(periods, n)?;
    let ln = log_partition(periods, sums, n);
    let pressure = log_partition(periods, sums, n + 1) - ln;
    let mean_energy = estimators::gibbs_mean(OrbitData::symbolic(periods), sums, sums, n);
    let convergence_gap = if n >= 2 {
        (pressure - (ln - log_partition(periods, sums, n - 1))).abs()
    } else {
        f64::NAN
    };
    let mut warnings = Vec::new();
    if convergence_gap > tol {
        warnings.push(format!(
            "ratio estimates at periods {n} and {} differ by {convergence_gap:.3e}",
            n - 1
        ));
    }
    Ok(EquilibriumStats {
        pressure,
        mean_energy,
        entropy: pressure - mean_energy,
        orbit_period_used: n,
        estimator: EstimatorKind::Orbit,
        convergence_gap,
        warnings,
    })
}

/// Orbit (ratio) estimate of P(φ) on the potential's own system.
pub fn pressure(phi: &Potential, n: usize) -> Result<EquilibriumStats> {
    let ens = Ensemble::for_potential(phi, n + 1)?;
    pressure_on(&ens, phi, n, CONVERGENCE_TOL)
}

pub fn pressure_on(ens: &Ensemble, phi: &Potential, n: usize, tol: f64) -> Result<EquilibriumStats> {
    let sums = ens.sums(phi)?;
    stats_from_sums(&ens.periods(), &sums, n, tol)
}

/// Cycle-expansion pressure of φ on a map ensemble, truncated at `n`.
pub fn pressure_determinant(ens: &Ensemble, phi: &Potential, n: usize) -> Result<EquilibriumStats> {
    let periods = ens.periods();
    let sums = ens.sums(phi)?;
    let data = OrbitData {
        periods: &periods,
        multipliers: ens.multipliers(),
        weighting: ens.weighting(),
    };
    let det = determinant_pressure(data, &sums, Some(&sums), n)?;
    // dP(φ + εφ)/dε = ∫φ dm
    let mean_energy = det.derivative;
    let prev = if n >= 2 {
        determinant_pressure(data, &sums, None, n - 1)?.pressure
    } else {
        f64::NAN
    };
    let convergence_gap = (det.pressure - prev).abs();
    Ok(EquilibriumStats {
        pressure: det.pressure,
        mean_energy,
        entropy: det.pressure - mean_energy,
        orbit_period_used: det.truncation,
        estimator: EstimatorKind::Determinant,
        convergence_gap,
        warnings: Vec::new(),
    })
}

pub const MATRIX_TOL: f64 = 1e-12;
pub const MATRIX_MAX_ITER: usize = 10_000;

/// log of the leading eigenvalue of the depth-k transfer matrix of a tabulated potential.
pub fn pressure_matrix(table: &CylinderTable, k: usize) -> Result<EquilibriumStats> {
    if k < table.depth() {
        return Err(Error::InvalidInput(format!(
            "matrix depth {k} is below the table depth {}",
            table.depth()
        )));
    }
    let spec = table.spec();
    if is_aperiodic(spec).is_none() {
        return Err(Error::InvalidInput("subshift is not aperiodic (mixing)".into()));
    }
    let words = enumerate_cylinders(spec, k, DEFAULT_CAP)?;
    let index: HashMap<&[usize], usize> = words.iter().enumerate().map(|(i, w)| (&w.symbols[..], i)).collect();
    let n = spec.n();
    let phi: Vec<f64> = words
        .iter()
        .map(|w| table.value(&w.symbols).expect("admissible cylinder has a value"))
        .collect();
    let shift = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weight: Vec<f64> = phi.iter().map(|p| (p - shift).exp()).collect();
    let succ: Vec<Vec<usize>> = words
        .iter()
        .map(|w| {
            let mut next = w.symbols[1..].to_vec();
            next.push(0);
            (0..n)
                .filter(|&s| spec.allowed(w.symbols[k - 1], s))
                .map(|s| {
                    next[k - 1] = s;
                    index[&next[..]]
                })
                .collect()
        })
        .collect();
    let m = words.len();
    let mut v = vec![1.0 / m as f64; m];
    let mut lam_prev = f64::NAN;
    let mut last_change = f64::INFINITY;
    for it in 1..=MATRIX_MAX_ITER {
        let w: Vec<f64> = (0..m)
            .map(|i| weight[i] * succ[i].iter().map(|&j| v[j]).sum::<f64>())
            .collect();
        let total: f64 = w.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                last_change,
            });
        }
        let lam = total; // v sums to one
        let w: Vec<f64> = w.into_iter().map(|x| x / total).collect();
        let vec_change = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs() / a.max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        last_change = ((lam - lam_prev) / lam).abs();
        v = w;
        if last_change <= MATRIX_TOL && vec_change <= 1e3 * MATRIX_TOL {
            let pressure = lam.ln() + shift;
            // mean energy from left and right eigenvectors
            let left = left_eigenvector(&weight, &succ, lam)?;
            let norm: f64 = left.iter().zip(&v).map(|(a, b)| a * b).sum();
            let mean_energy = left.iter().zip(&v).zip(&phi).map(|((a, b), p)| a * b * p).sum::<f64>() / norm;
            return Ok(EquilibriumStats {
                pressure,
                mean_energy,
                entropy: pressure - mean_energy,
                orbit_period_used: k,
                estimator: EstimatorKind::Matrix,
                convergence_gap: last_change,
                warnings: Vec::new(),
            });
        }
        lam_prev = lam;
    }
    Err(Error::NonConvergence {
        iterations: MATRIX_MAX_ITER,
        last_change,
    })
}

fn left_eigenvector(weight: &[f64], succ: &[Vec<usize>], lam: f64) -> Result<Vec<f64>> {
    let m = weight.len();
    let mut u = vec![1.0 / m as f64; m];
    for it in 1..=MATRIX_MAX_ITER {
        let mut w = vec![0.0; m];
        for i in 0..m {
            for &j in &succ[i] {
                w[j] += u[i] * weight[i];
            }
        }
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.into_iter().map(|x| x / total).collect();
        let change = w.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = w;
        if change <= MATRIX_TOL && ((total - lam) / lam).abs() <= 1e3 * MATRIX_TOL {
            return Ok(u);
        }
        if it == MATRIX_MAX_ITER {
            return Err(Error::NonConvergence {
                iterations: it,
                last_change: change,
            });
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceOptions {
    /// Base finite-difference step; None means 1e-3.
    pub h: Option<f64>,
    pub rel_tol: f64,
    /// Both estimates below this count as agreement.
    pub abs_tol: f64,
    pub cross_check: bool,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            h: None,
            rel_tol: 1e-2,
            abs_tol: 1e-6,
            cross_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    /// Orbit estimate (primary).
    pub variance: f64,
    /// Equilibrium mean of ψ (subtracted before the variance).
    pub mean: f64,
    pub finite_difference: Option<f64>,
    pub h: f64,
    pub period: usize,
    pub estimator: EstimatorKind,
}

/// Orbit variance with the finite-difference cross-check on precomputed sums.
/// Symbolic data uses the ratio pressure for the cross-check; map data (multipliers
/// given) uses the cycle-expansion pressure.
pub fn variance_from_sums(
    data: OrbitData<'_>,
    phi: &[f64],
    psi: &[f64],
    n: usize,
    opts: &VarianceOptions,
) -> Result<VarianceReport> {
    let (var, mean) = gibbs_variance(data, phi, psi, n);
    let var = var.max(0.0);
    let sup = data
        .periods
        .iter()
        .zip(psi)
        .map(|(&p, s)| (s / p as f64).abs())
        .fold(0.0, f64::max);
    let h = opts.h.unwrap_or(1e-3) / sup.max(1.0);
    let mut report = VarianceReport {
        variance: var,
        mean,
        finite_difference: None,
        h,
        period: n,
        estimator: EstimatorKind::Orbit,
    };
    if !opts.cross_check {
        return Ok(report);
    }
    let shifted = |t: f64| -> Vec<f64> { phi.iter().zip(psi).map(|(a, b)| a + t * b).collect() };
    let fd = if data.multipliers.is_some() {
        report.estimator = EstimatorKind::Determinant;
        let p = |t: f64| determinant_pressure(data, &shifted(t), None, n).map(|r| r.pressure);
        (p(h)? - 2.0 * p(0.0)? + p(-h)?) / (h * h)
    } else {
        require_period(data.periods, n)?;
        let p = |t: f64| estimators::ratio_pressure(data.periods, &shifted(t), n);
        (p(h) - 2.0 * p(0.0) + p(-h)) / (h * h)
    };
    report.finite_difference = Some(fd);
    if !agree(var, fd, opts.rel_tol, opts.abs_tol) {
        return Err(Error::CrossCheck {
            orbit: var,
            finite_difference: fd,
        });
    }
    Ok(report)
}

pub(crate) fn agree(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a.abs() < abs && b.abs() < abs) || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn orbit_data<'a>(ens: &'a Ensemble, periods: &'a [usize]) -> OrbitData<'a> {
    OrbitData {
        periods,
        multipliers: ens.multipliers(),
        weighting: ens.weighting(),
    }
}

/// Asymptotic variance of ψ under the equilibrium state of φ, at period n.
pub fn variance(ens: &Ensemble, psi: &Potential, phi: &Potential, n: usize, opts: &VarianceOptions) -> Result<VarianceReport> {
    let periods = ens.periods();
    let s_phi = ens.sums(phi)?;
    let s_psi = ens.sums(psi)?;
    variance_from_sums(orbit_data(ens, &periods), &s_phi, &s_psi, n, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub covariance: f64,
    pub sum: VarianceReport,
    pub first: VarianceReport,
    pub second: VarianceReport,
}

/// Covariance by polarization, from one sweep of Birkhoff sums.
pub fn covariance_from_sums(
    data: OrbitData<'_>,
    phi: &[f64],
    psi1: &[f64],
    psi2: &[f64],
    n: usize,
    opts: &VarianceOptions,
) -> Result<CovarianceReport> {
    let both: Vec<f64> = psi1.iter().zip(psi2).map(|(a, b)| a + b).collect();
    let sum = variance_from_sums(data, phi, &both, n, opts)?;
    let first = variance_from_sums(data, phi, psi1, n, opts)?;
    let second = variance_from_sums(data, phi, psi2, n, opts)?;
    // the direct weighted form equals the polarization identity up to rounding
    let covariance = gibbs_covariance(data, phi, psi1, psi2, n);
    Ok(CovarianceReport {
        covariance,
        sum,
        first,
        second,
    })
}

pub fn covariance(
    ens: &Ensemble,
    psi1: &Potential,
    psi2: &Potential,
    phi: &Potential,
    n: usize,
    opts: &VarianceOptions,
) -> Result<CovarianceReport> {
    let periods = ens.periods();
    let s_phi = ens.sums(phi)?;
    let s1 = ens.sums(psi1)?;
    let s2 = ens.sums(psi2)?;
    covariance_from_sums(orbit_data(ens, &periods), &s_phi, &s1, &s2, n, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// ‖ψ‖²_P.
    pub value: f64,
    pub variance: VarianceReport,
    /// −∫φ dm.
    pub denominator: f64,
    /// Pressure of φ (should be 0).
    pub pressure: f64,
}

/// Var(ψ, m_φ) / (−∫φ dm_φ) for a pressure-zero φ.
pub fn pressure_norm_sq(ens: &Ensemble, psi: &Potential, phi: &Potential, n: usize, opts: &VarianceOptions) -> Result<NormReport> {
    let periods = ens.periods();
    let s_phi = ens.sums(phi)?;
    let s_psi = ens.sums(psi)?;
    norm_from_sums(orbit_data(ens, &periods), &s_phi, &s_psi, n, opts)
}

pub fn norm_from_sums(data: OrbitData<'_>, phi: &[f64], psi: &[f64], n: usize, opts: &VarianceOptions) -> Result<NormReport> {
    let var = variance_from_sums(data, phi, psi, n, opts)?;
    let pressure = if data.periods.iter().any(|&p| p > n) {
        estimators::ratio_pressure(data.periods, phi, n)
    } else {
        f64::NAN
    };
    let denominator = -estimators::gibbs_mean(data, phi, phi, n);
    if !(denominator > 0.0) {
        return Err(Error::NonpositiveDenominator(denominator));
    }
    Ok(NormReport {
        value: var.variance / denominator,
        variance: var,
        denominator,
        pressure,
    })
}

/// max over primitive orbits of |S_pψ|/p.
pub fn cohomology_defect(ens: &Ensemble, psi: &Potential, max_period: usize) -> Result<f64> {
    let periods = ens.periods();
    let sums = ens.sums(psi)?;
    Ok(periods
        .iter()
        .zip(&sums)
        .filter(|(&p, _)| p <= max_period)
        .map(|(&p, s)| (s / p as f64).abs())
        .fold(0.0, f64::max))
}
