//! Holomorphic motion of cycles along parameter paths: predictor–corrector
//! tracking on the full cyclic system, log-multiplier derivatives and the
//! transport of the cyclic order of fixed points.

use crate::error::{Error, Result};
use crate::maps::{
    self, cmp_complex, Cycle, CycleCatalog, Domain, ExtPoint, QbPoint, RationalMap, TangentVector,
};
use crate::parallel::par_map;
use crate::poly::{self, C64};
use serde::{Deserialize, Serialize};

/// Residual accepted at every tracked node.
pub const TRACK_RESIDUAL: f64 = 1e-10;
/// Minimal distance of a tracked multiplier modulus from 1.
pub const REPELLING_MARGIN: f64 = 1e-3;
/// Newton iterations before a step is refined.
const MAX_NEWTON: usize = 8;

/// A one-parameter family t ↦ f_t.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamPath {
    /// t ↦ from + t·(to − from), t ∈ [0, 1].
    Segment { from: QbPoint, to: QbPoint },
    /// t ↦ (a + t·da, b + t·db).
    Tangent { at: QbPoint, dir: TangentVector },
    /// Coefficientwise interpolation between two maps, t ∈ [0, 1].
    Homotopy { from: RationalMap, to: RationalMap },
}

/// JSON form of the quasi-Blaschke paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PathSpec {
    Segment { from: QbPoint, to: QbPoint },
    Tangent { at: QbPoint, dir: TangentVector },
}

impl From<PathSpec> for ParamPath {
    fn from(s: PathSpec) -> Self {
        match s {
            PathSpec::Segment { from, to } => ParamPath::Segment { from, to },
            PathSpec::Tangent { at, dir } => ParamPath::Tangent { at, dir },
        }
    }
}

impl ParamPath {
    pub fn tangent(at: QbPoint, dir: TangentVector) -> Self {
        ParamPath::Tangent { at, dir }
    }

    pub fn spec(&self) -> Option<PathSpec> {
        match self {
            ParamPath::Segment { from, to } => Some(PathSpec::Segment {
                from: from.clone(),
                to: to.clone(),
            }),
            ParamPath::Tangent { at, dir } => Some(PathSpec::Tangent {
                at: at.clone(),
                dir: dir.clone(),
            }),
            ParamPath::Homotopy { .. } => None,
        }
    }

    /// Quasi-Blaschke coordinates at t, when the path lives in those coordinates.
    pub fn point_at(&self, t: f64) -> Option<QbPoint> {
        match self {
            ParamPath::Segment { from, to } => Some(QbPoint {
                a: from.a.iter().zip(&to.a).map(|(x, y)| x + (y - x) * t).collect(),
                b: from.b.iter().zip(&to.b).map(|(x, y)| x + (y - x) * t).collect(),
                validated: false,
            }),
            ParamPath::Tangent { at, dir } => Some(at.offset(dir, t)),
            ParamPath::Homotopy { .. } => None,
        }
    }

    pub fn map_at(&self, t: f64) -> Result<RationalMap> {
        match self {
            ParamPath::Homotopy { from, to } => {
                let lerp = |x: &[C64], y: &[C64]| -> Vec<C64> {
                    let n = x.len().max(y.len());
                    (0..n)
                        .map(|k| {
                            let a = x.get(k).copied().unwrap_or_default();
                            let b = y.get(k).copied().unwrap_or_default();
                            a + (b - a) * t
                        })
                        .collect()
                };
                let p = lerp(from.numerator(), to.numerator());
                let q = lerp(from.denominator(), to.denominator());
                if poly::degree(&poly::trim(&q, 0.0)) == 0 {
                    RationalMap::polynomial(poly::scale(&p, 1.0 / q[0]))
                } else {
                    RationalMap::new(p, q)
                }
            }
            _ => maps::qb(&self.point_at(t).expect("coordinate path")),
        }
    }

    /// Tangent vector at t = 0 in closed form, when available.
    pub fn tangent_at_zero(&self) -> Option<TangentVector> {
        match self {
            ParamPath::Segment { from, to } => Some(TangentVector {
                da: from.a.iter().zip(&to.a).map(|(x, y)| y - x).collect(),
                db: from.b.iter().zip(&to.b).map(|(x, y)| y - x).collect(),
            }),
            ParamPath::Tangent { dir, .. } => Some(dir.clone()),
            ParamPath::Homotopy { .. } => None,
        }
    }

    /// Parameter-space length of the path over [0, t].
    pub fn length_to(&self, t: f64) -> f64 {
        match self {
            ParamPath::Homotopy { from, to } => {
                let d: f64 = from
                    .numerator()
                    .iter()
                    .zip(to.numerator())
                    .chain(from.denominator().iter().zip(to.denominator()))
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                d * t.abs()
            }
            _ => self.tangent_at_zero().map(|v| v.norm()).unwrap_or(1.0) * t.abs(),
        }
    }

    /// Same path with parameter scaled: t ↦ self(c·t). Only for coordinate paths.
    pub fn reparametrized(&self, c: f64) -> Option<ParamPath> {
        match self {
            ParamPath::Tangent { at, dir } => Some(ParamPath::Tangent {
                at: at.clone(),
                dir: dir.scaled(c),
            }),
            ParamPath::Segment { from, .. } => {
                let dir = self.tangent_at_zero()?.scaled(c);
                Some(ParamPath::Tangent {
                    at: from.clone(),
                    dir,
                })
            }
            ParamPath::Homotopy { .. } => None,
        }
    }
}

/// Outcome of Newton on the cyclic system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// max_i |f(z_i) − z_{i+1}|.
pub fn cycle_residual(f: &RationalMap, pts: &[C64]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| (f.eval(pts[i]) - pts[(i + 1) % n]).norm())
        .fold(0.0, f64::max)
}

/// Newton on r_i = f(z_i) − z_{i+1} (indices mod n), updating `pts` in place.
///
/// The bordered cyclic system is reduced to one scalar equation for the first
/// correction, then unwound backwards through the contracting inverse derivatives.
pub fn newton_cycle(f: &RationalMap, pts: &mut [C64], max_iter: usize) -> NewtonOutcome {
    let n = pts.len();
    let mut r = vec![C64::new(0.0, 0.0); n];
    let mut dd = vec![C64::new(0.0, 0.0); n];
    let mut last_step = f64::INFINITY;
    for it in 0..=max_iter {
        let mut res = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..n {
            let (v, d) = f.eval_d(pts[i]);
            r[i] = v - pts[(i + 1) % n];
            dd[i] = d;
            res = res.max(r[i].norm());
            scale = scale.max(pts[i].norm());
        }
        if !res.is_finite() {
            return NewtonOutcome {
                iterations: it,
                residual: res,
                converged: false,
            };
        }
        if res <= 1e-13 * scale || (it > 0 && last_step <= 1e-15 * scale && res <= TRACK_RESIDUAL) {
            return NewtonOutcome {
                iterations: it,
                residual: res,
                converged: true,
            };
        }
        if it == max_iter {
            return NewtonOutcome {
                iterations: it,
                residual: res,
                converged: res <= TRACK_RESIDUAL,
            };
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut lam = C64::new(1.0, 0.0);
        for i in 0..n {
            acc = dd[i] * acc + r[i];
            lam *= dd[i];
        }
        let d0 = acc / (1.0 - lam);
        let mut next = d0;
        let mut step = d0.norm();
        let mut corr = vec![C64::new(0.0, 0.0); n];
        corr[0] = d0;
        for i in (1..n).rev() {
            corr[i] = (next - r[i]) / dd[i];
            next = corr[i];
            step = step.max(corr[i].norm());
        }
        if !step.is_finite() {
            return NewtonOutcome {
                iterations: it + 1,
                residual: res,
                converged: false,
            };
        }
        for i in 0..n {
            pts[i] += corr[i];
        }
        last_step = step;
    }
    unreachable!()
}

/// Samples of a tracked cycle along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrack {
    pub cycle: Cycle,
    pub grid: Vec<f64>,
    pub points: Vec<Vec<C64>>,
    pub multipliers: Vec<C64>,
}

fn multiplier(f: &RationalMap, pts: &[C64]) -> C64 {
    pts.iter().fold(C64::new(1.0, 0.0), |acc, &z| acc * f.eval_d(z).1)
}

/// Moves `pts` (a cycle of `map_at(t0)`) to `t1` with adaptive sub-steps.
fn advance(
    map_at: &dyn Fn(f64) -> Result<RationalMap>,
    end_map: Option<&RationalMap>,
    pts: &mut Vec<C64>,
    prev: &mut Option<(f64, Vec<C64>)>,
    t0: f64,
    t1: f64,
) -> Result<()> {
    let span = (t1 - t0).abs().max(1e-300);
    let mut t = t0;
    let mut dt = t1 - t0;
    let min_step = 1e-12 * (1.0 + t0.abs().max(t1.abs()));
    while (t1 - t).abs() > 1e-15 * span {
        let tn = if (t + dt - t1) * (t1 - t0).signum() >= 0.0 { t1 } else { t + dt };
        let owned;
        let f = if tn == t1 && end_map.is_some() {
            end_map.unwrap()
        } else {
            owned = map_at(tn)?;
            &owned
        };
        let mut trial = pts.clone();
        if let Some((tp, pp)) = prev.as_ref() {
            let ratio = (tn - t) / (t - tp);
            if ratio.is_finite() && ratio.abs() <= 4.0 {
                for i in 0..trial.len() {
                    trial[i] += (pts[i] - pp[i]) * ratio;
                }
            }
        }
        let out = newton_cycle(f, &mut trial, MAX_NEWTON);
        let lam = multiplier(f, &trial);
        let jump = trial
            .iter()
            .zip(pts.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if out.converged && out.residual < TRACK_RESIDUAL && lam.norm() > 1.0 + REPELLING_MARGIN && jump < 0.25 {
            *prev = Some((t, std::mem::replace(pts, trial)));
            t = tn;
            dt = (dt * if out.iterations <= 3 { 1.5 } else { 1.0 }).clamp(-(t1 - t0).abs(), (t1 - t0).abs());
        } else {
            dt *= 0.5;
            if dt.abs() < min_step {
                return Err(Error::Tracking {
                    t_fail: tn,
                    last_good: t,
                    reason: if !out.converged {
                        format!("Newton residual {:.3e}", out.residual)
                    } else if lam.norm() <= 1.0 + REPELLING_MARGIN {
                        format!("multiplier modulus {:.6} near 1", lam.norm())
                    } else {
                        "step underflow".into()
                    },
                });
            }
        }
    }
    Ok(())
}

/// Follows `cycle` (a cycle of the map at grid[0]) through the grid.
pub fn track_cycle(path: &ParamPath, cycle: &Cycle, grid: &[f64]) -> Result<CycleTrack> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if !cycle.repelling {
        return Err(Error::InvalidInput("cycle is not repelling".into()));
    }
    let map_at = |t: f64| path.map_at(t);
    let mut pts = cycle.points.clone();
    let f0 = path.map_at(grid[0])?;
    let out = newton_cycle(&f0, &mut pts, MAX_NEWTON);
    if !out.converged {
        return Err(Error::Tracking {
            t_fail: grid[0],
            last_good: grid[0],
            reason: "input is not a cycle of the start map".into(),
        });
    }
    let mut points = vec![pts.clone()];
    let mut multipliers = vec![multiplier(&f0, &pts)];
    let mut prev = None;
    for w in grid.windows(2) {
        let end = path.map_at(w[1])?;
        advance(&map_at, Some(&end), &mut pts, &mut prev, w[0], w[1])?;
        points.push(pts.clone());
        multipliers.push(multiplier(&end, &pts));
    }
    Ok(CycleTrack {
        cycle: cycle.clone(),
        grid: grid.to_vec(),
        points,
        multipliers,
    })
}

/// Moves every cycle of `catalog` (built for the map at t = 0) to parameter t.
///
/// Retries with a finer uniform grid when two tracked cycles collide, which
/// signals that a corrector jumped branches.
pub fn track_catalog(path: &ParamPath, catalog: &CycleCatalog, t: f64) -> Result<CycleCatalog> {
    let target = path.map_at(t)?;
    let base_steps = ((path.length_to(t) / 0.02).ceil() as usize).max(if t.abs() < 0.05 { 1 } else { 4 });
    let mut last_err = None;
    for attempt in 0..4 {
        let steps = base_steps << attempt;
        let grid: Vec<f64> = (0..=steps).map(|k| t * k as f64 / steps as f64).collect();
        let maps: Vec<RationalMap> = grid.iter().map(|&s| path.map_at(s)).collect::<Result<_>>()?;
        let map_at = |s: f64| path.map_at(s);
        let tracked: Vec<Result<Vec<C64>>> = par_map(&catalog.cycles, |c| {
            let mut pts = c.points.clone();
            let mut prev = None;
            for k in 0..steps {
                advance(&map_at, Some(&maps[k + 1]), &mut pts, &mut prev, grid[k], grid[k + 1])?;
            }
            Ok(pts)
        });
        let mut cycles = Vec::with_capacity(tracked.len());
        let mut failure = None;
        for r in tracked {
            match r {
                Ok(p) => cycles.push(Cycle::from_points(&target, p)),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failure {
            last_err = Some(e);
            continue;
        }
        let cat = CycleCatalog::from_parts(
            target.clone(),
            catalog.max_period,
            cycles,
            catalog.labels.clone(),
            Domain::Plane,
            catalog.warnings.clone(),
        );
        match cat.check_distinct() {
            Ok(()) => return Ok(cat),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Tracking {
        t_fail: t,
        last_good: 0.0,
        reason: "catalog tracking failed".into(),
    }))
}

/// d/dt log λ_C at t = 0 along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DlogMultiplier {
    /// Richardson-refined derivative of log λ.
    pub derivative: C64,
    /// Real part: d/dt log|λ|.
    pub real: f64,
    /// Plain central difference at step h.
    pub coarse: C64,
}

/// Richardson-refined central difference from samples of log λ at ±h and ±h/2.
pub(crate) fn dlog_from_samples(l0: C64, lm: C64, lmh: C64, lph: C64, lp: C64, h: f64) -> Result<DlogMultiplier> {
    let unwrap = |l: C64| -> Result<C64> {
        let z = l / l0;
        if z.arg().abs() > 1.0 {
            return Err(Error::BranchJump);
        }
        Ok(z.ln())
    };
    let (a, b, c, d) = (unwrap(lm)?, unwrap(lmh)?, unwrap(lph)?, unwrap(lp)?);
    // consecutive nodes must not wrap either
    for (x, y) in [(a, b), (b, C64::new(0.0, 0.0)), (C64::new(0.0, 0.0), c), (c, d)] {
        if (x.im - y.im).abs() > 1.0 {
            return Err(Error::BranchJump);
        }
    }
    let coarse = (d - a) / (2.0 * h);
    let fine = (c - b) / h;
    let derivative = (fine * 4.0 - coarse) / 3.0;
    Ok(DlogMultiplier {
        derivative,
        real: derivative.re,
        coarse,
    })
}

/// d/dt log λ_C at t = 0 by central differences at h and h/2 plus one Richardson step.
pub fn dlog_multiplier(path: &ParamPath, cycle: &Cycle, h: f64) -> Result<DlogMultiplier> {
    let fwd = track_cycle(path, cycle, &[0.0, h / 2.0, h])?;
    let bwd = track_cycle(path, cycle, &[0.0, -h / 2.0, -h])?;
    dlog_from_samples(
        fwd.multipliers[0],
        bwd.multipliers[2],
        bwd.multipliers[1],
        fwd.multipliers[1],
        fwd.multipliers[2],
        h,
    )
}

/// Default step for derivatives along a path.
pub fn default_h(t_range: f64) -> f64 {
    1e-4 * t_range.abs().max(1.0)
}

/// Cyclic order of the fixed points of a quasi-Blaschke map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkingLabel {
    /// Fixed point marked as the attracting point 0.
    pub zero: [f64; 2],
    /// Fixed point marked as ∞ (always the point at infinity in normal form).
    pub infinity: String,
    /// Remaining fixed points of the start map, counter-clockwise along the
    /// Julia curve starting from the marked point 1.
    pub cyclic_order: Vec<[f64; 2]>,
    /// Arguments of the same points at the Blaschke endpoint.
    pub endpoint_arguments: Vec<f64>,
    /// Permutation sending positions in `cyclic_order` to indices in the
    /// canonically sorted list of repelling fixed points of the start map.
    pub permutation: Vec<usize>,
}

/// Transports the counter-clockwise order of circle fixed points from the
/// Blaschke endpoint (t = 1) back to the start (t = 0) of `path`.
pub fn transport_marking(path: &ParamPath, grid_steps: usize) -> Result<MarkingLabel> {
    let f0 = path.map_at(0.0)?;
    let f1 = path.map_at(1.0)?;
    if f1.circle_form().is_none() {
        return Err(Error::InvalidInput("path must end on the Blaschke locus".into()));
    }
    let fp = f0.fixed_points(0);
    let mut finite: Vec<(C64, C64)> = fp
        .points
        .iter()
        .filter_map(|(p, m)| match p {
            ExtPoint::Finite(z) if m.norm() > 1.0 => Some((*z, *m)),
            _ => None,
        })
        .collect();
    finite.sort_by(|x, y| cmp_complex(x.0, y.0));
    let zero = fp
        .points
        .iter()
        .find_map(|(p, m)| match p {
            ExtPoint::Finite(z) if m.norm() < 1.0 => Some(*z),
            _ => None,
        })
        .ok_or_else(|| Error::Data("no attracting finite fixed point".into()))?;
    let d = f0.degree();
    if finite.len() != d - 1 {
        return Err(Error::Data(format!(
            "expected {} repelling finite fixed points, found {}",
            d - 1,
            finite.len()
        )));
    }
    let steps = grid_steps.max(2);
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let tracks: Vec<CycleTrack> = finite
        .iter()
        .map(|&(z, _)| track_cycle(path, &Cycle::from_points(&f0, vec![z]), &grid))
        .collect::<Result<_>>()?;
    for k in 0..grid.len() {
        for i in 0..tracks.len() {
            for j in 0..i {
                if (tracks[i].points[k][0] - tracks[j].points[k][0]).norm() < 1e-6 {
                    return Err(Error::Collision(grid[k]));
                }
            }
        }
    }
    let end: Vec<C64> = tracks.iter().map(|t| t.points[grid.len() - 1][0]).collect();
    let start_idx = end
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - 1.0).norm().partial_cmp(&(y.1 - 1.0).norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let base_arg = end[start_idx].arg();
    let rel = |z: C64| (z.arg() - base_arg).rem_euclid(std::f64::consts::TAU);
    let mut order: Vec<usize> = (0..end.len()).collect();
    order.sort_by(|&i, &j| rel(end[i]).partial_cmp(&rel(end[j])).unwrap());
    Ok(MarkingLabel {
        zero: [zero.re, zero.im],
        infinity: "inf".into(),
        cyclic_order: order.iter().map(|&i| [finite[i].0.re, finite[i].0.im]).collect(),
        endpoint_arguments: order.iter().map(|&i| end[i].arg()).collect(),
        permutation: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{qb, QbPoint};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quad_path() -> ParamPath {
        ParamPath::Homotopy {
            from: RationalMap::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
            to: RationalMap::polynomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        }
    }

    #[test]
    fn newton_polishes_perturbed_cycle() {
        let f = qb(&QbPoint::real_diagonal(2, 0.0)).unwrap();
        let w = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let mut pts = vec![w + c(1e-3, -2e-3), w * w + c(-1e-3, 0.0)];
        let out = newton_cycle(&f, &mut pts, 10);
        assert!(out.converged);
        assert!((pts[0] - w).norm() < 1e-13);
        assert!((pts[1] - w * w).norm() < 1e-13);
    }

    #[test]
    fn constant_path_is_stationary() {
        let p = QbPoint::real_diagonal(2, 0.3);
        let path = ParamPath::tangent(p.clone(), TangentVector::zero(1));
        let f = qb(&p).unwrap();
        let cat = CycleCatalog::build(&f, 3, None).unwrap();
        for cyc in &cat.cycles {
            let tr = track_cycle(&path, cyc, &[0.0, 0.5, 1.0]).unwrap();
            for pts in &tr.points {
                for (a, b) in pts.iter().zip(&tr.points[0]) {
                    assert!((a - b).norm() < 1e-14);
                }
            }
            let dl = dlog_multiplier(&path, cyc, 1e-4).unwrap();
            assert!(dl.derivative.norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_family_fixed_point() {
        let path = quad_path();
        let f0 = path.map_at(0.0).unwrap();
        let cyc = Cycle::from_points(&f0, vec![c(1.0, 0.0)]);
        let grid: Vec<f64> = (0..=10).map(|k| 0.01 * k as f64).collect();
        let tr = track_cycle(&path, &cyc, &grid).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let exact = (1.0 + (1.0 - 4.0 * t).sqrt()) / 2.0;
            assert!((tr.points[k][0] - exact).norm() < 1e-12);
            assert!((tr.multipliers[k] - 2.0 * exact).norm() < 1e-12);
        }
        let dl = dlog_multiplier(&path, &cyc, 1e-4).unwrap();
        assert!((dl.derivative - c(-1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn blaschke_fixed_point_log_derivative() {
        let p = QbPoint::real_diagonal(2, 0.5);
        let path = ParamPath::tangent(p.clone(), TangentVector::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]));
        let f = qb(&p).unwrap();
        let cyc = Cycle::from_points(&f, vec![c(1.0, 0.0)]);
        let dl = dlog_multiplier(&path, &cyc, 1e-4).unwrap();
        assert!((dl.derivative - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn tracking_reports_failure() {
        let path = quad_path();
        let f0 = path.map_at(0.0).unwrap();
        let cyc = Cycle::from_points(&f0, vec![c(1.0, 0.0)]);
        // the fixed point becomes parabolic at t = 1/4
        let err = track_cycle(&path, &cyc, &[0.0, 0.3]).unwrap_err();
        assert!(matches!(err, Error::Tracking { .. }));
    }

    #[test]
    fn real_locus_paths_have_real_log_derivatives() {
        let p = QbPoint::real_diagonal(2, 0.3);
        let path = ParamPath::tangent(p.clone(), TangentVector::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]));
        let f = qb(&p).unwrap();
        let cat = CycleCatalog::build(&f, 5, None).unwrap();
        for cyc in &cat.cycles {
            let dl = dlog_multiplier(&path, cyc, 1e-4).unwrap();
            assert!(dl.derivative.im.abs() < 1e-8);
        }
    }

    #[test]
    fn log_derivative_independent_of_base_point() {
        let p = QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).unwrap();
        let path = ParamPath::tangent(p.clone(), TangentVector::new(vec![c(0.0, 1.0)], vec![c(0.5, 0.0)]));
        let f = qb(&p).unwrap();
        let cat = CycleCatalog::build(&f, 4, None).unwrap();
        let cyc = cat.cycles.iter().find(|c| c.period == 4).unwrap();
        let mut rotated = cyc.points.clone();
        rotated.rotate_left(2);
        let other = Cycle {
            points: rotated,
            ..cyc.clone()
        };
        let a = dlog_multiplier(&path, cyc, 1e-4).unwrap();
        let b = dlog_multiplier(&path, &other, 1e-4).unwrap();
        assert!((a.derivative - b.derivative).norm() < 1e-9);
    }

    #[test]
    fn marking_of_power_map() {
        let d3 = QbPoint::new(vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0); 2]).unwrap();
        let path = ParamPath::Segment {
            from: d3.clone(),
            to: d3,
        };
        let m = transport_marking(&path, 4).unwrap();
        assert_eq!(m.cyclic_order.len(), 2);
        assert!((m.cyclic_order[0][0] - 1.0).abs() < 1e-12);
        assert!((m.cyclic_order[1][0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn marking_stable_under_refinement() {
        let p = QbPoint::new(vec![c(0.2, 0.1), c(-0.3, 0.2)], vec![c(0.1, 0.0), c(-0.2, -0.1)]).unwrap();
        let path = ParamPath::Segment {
            from: p.clone(),
            to: p.symmetrization(),
        };
        let a = transport_marking(&path, 4).unwrap();
        let b = transport_marking(&path, 17).unwrap();
        assert_eq!(a.permutation, b.permutation);
        assert_eq!(a.cyclic_order, b.cyclic_order);
    }
}
