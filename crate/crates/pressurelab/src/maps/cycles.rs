//! Periodic cycles: circle-mode enumeration for maps preserving the unit circle,
//! plane mode by continuation from a circle map, and a seed-grid fallback.

use super::{blaschke, cmp_complex, RationalMap, Structure};
use crate::continuation::{newton_cycle, track_catalog, ParamPath};
use crate::error::{Error, Result};
use crate::parallel::par_map;
use crate::poly::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Where cycles are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Circle,
    Plane,
}

/// Trace weights used by the determinant pressure estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceWeight {
    /// Weight 1 (locally constant potentials on a subshift).
    Symbolic,
    /// 1/(1 − λ^{−r}): real-analytic expanding circle maps.
    Circle,
    /// 1/|1 − λ^{−r}|²: conformal repellers in the plane.
    Conformal,
}

/// A periodic orbit z₀ … z_{n−1} with f(z_i) = z_{i+1 mod n}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle {
    pub points: Vec<C64>,
    pub period: usize,
    pub multiplier: C64,
    pub repelling: bool,
}

impl Cycle {
    /// Builds a cycle from ordered points, computing the multiplier and rotating so
    /// that the lexicographically least point comes first.
    pub fn from_points(f: &RationalMap, mut points: Vec<C64>) -> Self {
        let multiplier = points
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &z| acc * f.eval_d(z).1);
        let first = (0..points.len())
            .min_by(|&i, &j| cmp_complex(points[i], points[j]))
            .unwrap_or(0);
        points.rotate_left(first);
        Self {
            period: points.len(),
            repelling: multiplier.norm() > 1.0,
            multiplier,
            points,
        }
    }

    pub fn residual(&self, f: &RationalMap) -> f64 {
        crate::continuation::cycle_residual(f, &self.points)
    }

    /// Least pairwise distance between points of the cycle.
    pub fn separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in 0..i {
                m = m.min((self.points[i] - self.points[j]).norm());
            }
        }
        m
    }
}

impl RationalMap {
    /// Circle weights for maps preserving the unit circle, conformal weights otherwise.
    pub fn trace_weighting(&self) -> TraceWeight {
        if self.circle_form().is_some() {
            TraceWeight::Circle
        } else {
            TraceWeight::Conformal
        }
    }
}

const COLLISION_TOL: f64 = 1e-9;
const CYCLE_MATCH_TOL: f64 = 1e-6;

/// Primitive cycles of every period up to `max_period`, ordered by period and label.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCatalog {
    pub map: RationalMap,
    pub max_period: usize,
    pub cycles: Vec<Cycle>,
    /// Circle label of each cycle's seed point (conjugacy with z^d); tracked
    /// catalogs keep the labels of the catalog they were moved from.
    pub labels: Vec<u64>,
    pub domain: Domain,
    pub weighting: TraceWeight,
    pub warnings: Vec<String>,
}

impl CycleCatalog {
    pub(crate) fn from_parts(
        map: RationalMap,
        max_period: usize,
        cycles: Vec<Cycle>,
        labels: Vec<u64>,
        domain: Domain,
        warnings: Vec<String>,
    ) -> Self {
        let weighting = map.trace_weighting();
        Self {
            map,
            max_period,
            cycles,
            labels,
            domain,
            weighting,
            warnings,
        }
    }

    /// Enumerates cycles up to `max_period`. Without an explicit domain, circle mode
    /// is used for maps preserving the unit circle and plane mode otherwise.
    pub fn build(f: &RationalMap, max_period: usize, domain: Option<Domain>) -> Result<Self> {
        if max_period == 0 {
            return Err(Error::InvalidInput("period must be at least 1".into()));
        }
        let d = f.degree() as u128;
        let needed = d.checked_pow(max_period as u32).unwrap_or(u128::MAX);
        if needed > 50_000_000 {
            return Err(Error::ResourceCap {
                what: "cycle points".into(),
                needed,
                cap: 50_000_000,
            });
        }
        match (domain, f.circle_form().is_some()) {
            (Some(Domain::Circle), false) => Err(Error::InvalidInput(
                "circle mode needs a map preserving the unit circle".into(),
            )),
            (_, true) => circle_catalog(f, max_period),
            (_, false) => plane_catalog(f, max_period),
        }
    }

    /// Cycles of exact period p.
    pub fn of_period(&self, p: usize) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().filter(move |c| c.period == p)
    }

    /// Number of points with f^n z = z on the Julia set covered by the catalog.
    pub fn point_count(&self, n: usize) -> usize {
        self.cycles
            .iter()
            .filter(|c| n % c.period == 0)
            .map(|c| c.period)
            .sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.cycles
            .iter()
            .map(|c| c.residual(&self.map))
            .fold(0.0, f64::max)
    }

    /// Fails if two catalog entries are the same cycle, or an entry retraces a
    /// shorter cycle (a tracked branch jumped). Distinct cycles may share points to
    /// machine precision where they shadow a repelling fixed point, so whole
    /// cycles are compared.
    pub fn check_distinct(&self) -> Result<()> {
        let same = |a: &Cycle, i: usize, b: &Cycle, j: usize| -> bool {
            let p = a.period;
            (0..p).all(|k| (a.points[(i + k) % p] - b.points[(j + k) % p]).norm() < CYCLE_MATCH_TOL)
        };
        for (ci, c) in self.cycles.iter().enumerate() {
            let p = c.period;
            for q in (1..p).filter(|q| p % q == 0) {
                if same(c, 0, c, q) {
                    return Err(Error::Tracking {
                        t_fail: 0.0,
                        last_good: 0.0,
                        reason: format!("cycle {ci} retraces a cycle of period {q}"),
                    });
                }
            }
        }
        let mut pts: Vec<(C64, usize, usize)> = self
            .cycles
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.points.iter().enumerate().map(move |(k, &z)| (z, i, k)))
            .collect();
        pts.sort_by(|a, b| {
            a.0.re
                .partial_cmp(&b.0.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.im.partial_cmp(&b.0.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        for i in 0..pts.len() {
            let mut j = i + 1;
            while j < pts.len() && pts[j].0.re - pts[i].0.re < COLLISION_TOL {
                let (zi, ci, ki) = pts[i];
                let (zj, cj, kj) = pts[j];
                if ci != cj
                    && (zj - zi).norm() < COLLISION_TOL
                    && self.cycles[ci].period == self.cycles[cj].period
                    && same(&self.cycles[ci], ki, &self.cycles[cj], kj)
                {
                    return Err(Error::Tracking {
                        t_fail: 0.0,
                        last_good: 0.0,
                        reason: format!("cycles {ci} and {cj} collided"),
                    });
                }
                j += 1;
            }
        }
        Ok(())
    }
}

/// All cycles whose period divides n (d^n − 1 points on the circle for Blaschke maps).
pub fn cycles(f: &RationalMap, n: usize, domain: Domain) -> Result<Vec<Cycle>> {
    let cat = CycleCatalog::build(f, n, Some(domain))?;
    let out: Vec<Cycle> = cat
        .cycles
        .into_iter()
        .filter(|c| n % c.period == 0)
        .collect();
    Ok(out)
}

/// Lift θ ↦ rot + dθ + 2Σ arg(1 − a_j e^{−iθ}) of a circle map, shifted so that a
/// fixed point sits at 0 and F(0) = 0.
struct Lift {
    rot: f64,
    zeros: Vec<C64>,
    d: u64,
    shift: f64,
    wind: f64,
}

impl Lift {
    fn new(rot: f64, zeros: Vec<C64>) -> Self {
        let d = zeros.len() as u64 + 1;
        let mut l = Lift {
            rot,
            zeros,
            d,
            shift: 0.0,
            wind: 0.0,
        };
        // F(θ) − θ increases by 2π(d−1) over a turn; pick its first 2π-multiple.
        let h0 = l.raw(0.0);
        let k0 = (h0 / TAU).ceil();
        let target = TAU * k0;
        let (mut lo, mut hi) = (0.0, TAU);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if l.raw(mid) - mid < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        let th = 0.5 * (lo + hi);
        l.shift = th;
        l.wind = target;
        l
    }

    fn raw(&self, th: f64) -> f64 {
        let e = C64::from_polar(1.0, -th);
        let mut s = self.rot + self.d as f64 * th;
        for &a in &self.zeros {
            s += 2.0 * (1.0 - a * e).arg();
        }
        s
    }

    fn raw_d(&self, th: f64) -> f64 {
        let e = C64::from_polar(1.0, -th);
        let mut s = self.d as f64;
        for &a in &self.zeros {
            let w = a * e;
            s += 2.0 * (w / (1.0 - w)).re;
        }
        s
    }

    /// Shifted lift on [0, 2π]: increasing from 0 to 2πd.
    fn f(&self, u: f64) -> f64 {
        self.raw(u + self.shift) - self.shift - self.wind
    }

    fn fd(&self, u: f64) -> f64 {
        self.raw_d(u + self.shift)
    }

    /// Sign of F^n(u) − u − 2πk using integer winding bookkeeping.
    fn above(&self, u: f64, n: usize, k: u64) -> bool {
        let mut x = u;
        let mut w: i128 = 0;
        for _ in 0..n {
            let y = self.f(x);
            let fl = (y / TAU).floor();
            w = w * self.d as i128 + fl as i128;
            x = y - TAU * fl;
        }
        let diff = (w - k as i128) as f64 * TAU + (x - u);
        diff >= 0.0
    }

    /// Point with label k among the solutions of F^n(u) = u + 2πk.
    fn solve_label(&self, n: usize, k: u64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, TAU);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.above(mid, n, k) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse branch: u ∈ [0, 2π) with F(u) = target.
    fn inverse(&self, target: f64, guess: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, TAU);
        let mut u = guess.clamp(0.0, TAU);
        for _ in 0..100 {
            let v = self.f(u) - target;
            if v > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            if v == 0.0 {
                return u;
            }
            let mut next = u - v / self.fd(u);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 4.0 * f64::EPSILON * (1.0 + u.abs()) {
                return next;
            }
            u = next;
        }
        u
    }
}

/// Labels of primitive orbits of exact period n under k ↦ d·k mod (dⁿ − 1).
fn necklace_representatives(d: u64, n: usize) -> Vec<u64> {
    let m = d.pow(n as u32) - 1;
    let mut reps = Vec::new();
    'outer: for k in 0..m {
        let mut j = k;
        for step in 1..=n {
            j = ((j as u128 * d as u128) % m as u128) as u64;
            if j < k {
                continue 'outer;
            }
            if j == k {
                if step == n {
                    reps.push(k);
                }
                continue 'outer;
            }
        }
    }
    reps
}

fn circle_catalog(f: &RationalMap, max_period: usize) -> Result<CycleCatalog> {
    let (rot, zeros) = f.circle_form().expect("circle form");
    let lift = Lift::new(rot, zeros);
    let d = lift.d;
    let mut cycles = Vec::new();
    let mut labels = Vec::new();
    let mut warnings = Vec::new();
    for n in 1..=max_period {
        let m = d.pow(n as u32) - 1;
        let reps = necklace_representatives(d, n);
        let found: Vec<Cycle> = par_map(&reps, |&k| {
            let mut lab = Vec::with_capacity(n);
            let mut j = k;
            for _ in 0..n {
                lab.push(j);
                j = ((j as u128 * d as u128) % m as u128) as u64;
            }
            let mut u = vec![0.0; n];
            u[0] = lift.solve_label(n, k);
            // Unwind the orbit backwards through contracting inverse branches, twice.
            let mut next = u[0];
            for _round in 0..2 {
                for i in (0..n).rev() {
                    let branch = ((lab[i] as u128 * d as u128) / m as u128) as f64;
                    let guess = if u[i] != 0.0 { u[i] } else { TAU * lab[i] as f64 / m as f64 };
                    u[i] = lift.inverse(next + TAU * branch, guess);
                    next = u[i];
                }
            }
            let mut pts: Vec<C64> = u
                .iter()
                .map(|&x| C64::from_polar(1.0, x + lift.shift))
                .collect();
            newton_cycle(f, &mut pts, 2);
            Cycle::from_points(f, pts)
        });
        let count: usize = found.len() * n;
        let expected = necklace_count(d, n);
        if found.len() != expected {
            warnings.push(format!(
                "period {n}: {} primitive cycles, expected {expected} ({count} points)",
                found.len()
            ));
        }
        labels.extend(reps);
        cycles.extend(found);
    }
    let cat = CycleCatalog::from_parts(
        f.clone(),
        max_period,
        cycles,
        labels,
        Domain::Circle,
        warnings,
    );
    for n in 1..=max_period {
        let pts = cat.point_count(n) as u64;
        if pts != d.pow(n as u32) - 1 {
            return Err(Error::Data(format!(
                "circle enumeration incomplete at period {n}: {pts} points"
            )));
        }
    }
    Ok(cat)
}

/// Number of primitive orbits of exact period n for multiplication by d on the circle.
fn necklace_count(d: u64, n: usize) -> usize {
    // Möbius inversion of Σ_{p|n} p·N_p = dⁿ − 1.
    let mut exact = vec![0i128; n + 1];
    for p in 1..=n {
        let mut v = d.pow(p as u32) as i128 - 1;
        for q in 1..p {
            if p % q == 0 {
                v -= exact[q];
            }
        }
        exact[p] = v;
    }
    (exact[n] / n as i128) as usize
}

fn plane_catalog(f: &RationalMap, max_period: usize) -> Result<CycleCatalog> {
    match f.structure() {
        Structure::QuasiBlaschke(pt) => {
            let sym = pt.symmetrization();
            if sym.a.iter().any(|a| a.norm() >= 1.0) {
                return grid_catalog(f, max_period);
            }
            let base = super::qb(&sym)?;
            let start = circle_catalog(&base, max_period)?;
            let path = ParamPath::Segment {
                from: sym,
                to: pt.clone(),
            };
            track_catalog(&path, &start, 1.0)
        }
        Structure::Polynomial => {
            let d = f.degree();
            let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
            coeffs[d] = C64::new(1.0, 0.0);
            let power = RationalMap::polynomial(coeffs)?;
            let start = circle_catalog(&blaschke(&vec![C64::new(0.0, 0.0); d - 1])?, max_period)?;
            let start = CycleCatalog::from_parts(
                power.clone(),
                max_period,
                start.cycles,
                start.labels,
                Domain::Circle,
                start.warnings,
            );
            let path = ParamPath::Homotopy {
                from: power,
                to: f.clone(),
            };
            track_catalog(&path, &start, 1.0)
        }
        _ => grid_catalog(f, max_period),
    }
}

/// Newton from a polar seed grid on fⁿ(z) = z; only for small periods.
fn grid_catalog(f: &RationalMap, max_period: usize) -> Result<CycleCatalog> {
    if max_period > 8 {
        return Err(Error::ResourceCap {
            what: "seed-grid cycle search period".into(),
            needed: max_period as u128,
            cap: 8,
        });
    }
    let d = f.degree();
    let mut cycles: Vec<Cycle> = Vec::new();
    let mut warnings = Vec::new();
    for n in 1..=max_period {
        let rings = 12 + 4 * n;
        let spokes = 8 * d.pow(n as u32);
        let seeds: Vec<C64> = (0..rings)
            .flat_map(|r| {
                let rad = 0.3 * (10.0f64).powf(r as f64 / rings as f64);
                (0..spokes).map(move |s| C64::from_polar(rad, TAU * (s as f64 + 0.5 * (r % 2) as f64) / spokes as f64))
            })
            .collect();
        let hits: Vec<Option<Cycle>> = par_map(&seeds, |&z0| {
            let mut z = z0;
            for _ in 0..60 {
                let mut w = z;
                let mut dw = C64::new(1.0, 0.0);
                for _ in 0..n {
                    let (v, dv) = f.eval_d(w);
                    dw *= dv;
                    w = v;
                }
                let g = w - z;
                let step = g / (dw - 1.0);
                if !step.re.is_finite() || !step.im.is_finite() {
                    return None;
                }
                z -= step;
                if step.norm() < 1e-14 * (1.0 + z.norm()) {
                    break;
                }
            }
            let mut pts = vec![z];
            for _ in 1..n {
                let last = *pts.last().unwrap();
                pts.push(f.eval(last));
            }
            let out = newton_cycle(f, &mut pts, 6);
            if !out.converged {
                return None;
            }
            let cyc = Cycle::from_points(f, pts);
            if cyc.separation() < 1e-8 || !cyc.repelling {
                return None;
            }
            Some(cyc)
        });
        let mut found: Vec<Cycle> = Vec::new();
        for c in hits.into_iter().flatten() {
            if !found.iter().any(|o| (o.points[0] - c.points[0]).norm() < 1e-8) {
                found.push(c);
            }
        }
        found.sort_by(|a, b| cmp_complex(a.points[0], b.points[0]));
        let expected = (d.pow(n as u32) as i64) - 1;
        let got: i64 = found.len() as i64 * n as i64
            + cycles.iter().filter(|c| n % c.period == 0).map(|c| c.period as i64).sum::<i64>();
        if got != expected {
            warnings.push(format!(
                "seed grid found {got} repelling points of period dividing {n}; a quasi-Blaschke map has {expected}"
            ));
        }
        cycles.extend(found);
    }
    let labels = vec![0; cycles.len()];
    Ok(CycleCatalog::from_parts(
        f.clone(),
        max_period,
        cycles,
        labels,
        Domain::Plane,
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{qb, QbPoint};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn necklaces() {
        assert_eq!(necklace_representatives(2, 1), vec![0]);
        assert_eq!(necklace_representatives(2, 2), vec![1]);
        assert_eq!(necklace_representatives(2, 3), vec![1, 3]);
        for n in 1..=10 {
            assert_eq!(necklace_representatives(2, n).len(), necklace_count(2, n));
            assert_eq!(necklace_representatives(3, n.min(7)).len(), necklace_count(3, n.min(7)));
        }
    }

    #[test]
    fn square_map_examples() {
        let f = blaschke(&[c(0.0, 0.0)]).unwrap();
        let two = cycles(&f, 2, Domain::Circle).unwrap();
        let pts: usize = two.iter().map(|c| c.period).sum();
        assert_eq!(pts, 3);
        let c2 = two.iter().find(|c| c.period == 2).unwrap();
        let w = C64::from_polar(1.0, TAU / 3.0);
        assert!(c2.points.iter().any(|z| (z - w).norm() < 1e-14));
        assert!(c2.points.iter().any(|z| (z - w * w).norm() < 1e-14));
        assert!((c2.multiplier - 4.0).norm() < 1e-12);
        let one = cycles(&f, 1, Domain::Circle).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].points[0] - 1.0).norm() < 1e-15);
        assert!((one[0].multiplier - 2.0).norm() < 1e-14);
    }

    #[test]
    fn blaschke_counts_and_reality() {
        let f = blaschke(&[c(0.3, 0.0)]).unwrap();
        for n in 1..=3 {
            let pts: usize = cycles(&f, n, Domain::Circle).unwrap().iter().map(|c| c.period).sum();
            assert_eq!(pts, (1 << n) - 1);
        }
        let g = blaschke(&[c(0.5, 0.2), c(-0.3, 0.4)]).unwrap();
        let cat = CycleCatalog::build(&g, 6, None).unwrap();
        assert_eq!(cat.weighting, TraceWeight::Circle);
        for n in 1..=6 {
            assert_eq!(cat.point_count(n), 3usize.pow(n as u32) - 1);
        }
        for cyc in &cat.cycles {
            assert!(cyc.residual(&g) < 1e-12);
            assert!(cyc.points.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
            assert!(cyc.multiplier.re > 1.0);
            assert!(cyc.multiplier.im.abs() < 1e-10 * cyc.multiplier.norm());
            assert!(cyc.separation() > 1e-8);
        }
        cat.check_distinct().unwrap();
    }

    #[test]
    fn long_cycles_are_accurate() {
        let f = qb(&QbPoint::real_diagonal(2, 0.5)).unwrap();
        let cat = CycleCatalog::build(&f, 14, None).unwrap();
        assert!(cat.max_residual() < 1e-12);
        cat.check_distinct().unwrap();
    }

    #[test]
    fn plane_mode_quasi_blaschke() {
        let p = QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).unwrap();
        let f = qb(&p).unwrap();
        let cat = CycleCatalog::build(&f, 8, None).unwrap();
        assert_eq!(cat.weighting, TraceWeight::Conformal);
        for n in 1..=8 {
            assert_eq!(cat.point_count(n), (1 << n) - 1);
        }
        assert!(cat.max_residual() < 1e-10);
        assert!(cat.cycles.iter().all(|c| c.repelling));
        cat.check_distinct().unwrap();
        let fixed: Vec<&Cycle> = cat.of_period(1).collect();
        assert!((fixed[0].points[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn plane_mode_polynomial() {
        let f = RationalMap::polynomial(vec![c(0.1, 0.05), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cat = CycleCatalog::build(&f, 7, None).unwrap();
        for n in 1..=7 {
            assert_eq!(cat.point_count(n), (1 << n) - 1);
        }
        assert!(cat.max_residual() < 1e-10);
        cat.check_distinct().unwrap();
    }

    #[test]
    fn grid_fallback_matches_continuation() {
        let p = QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).unwrap();
        let f = qb(&p).unwrap();
        let tracked = CycleCatalog::build(&f, 4, None).unwrap();
        let grid = grid_catalog(&f, 4).unwrap();
        assert!(grid.warnings.is_empty(), "{:?}", grid.warnings);
        assert_eq!(grid.cycles.len(), tracked.cycles.len());
        for cyc in &tracked.cycles {
            assert!(grid
                .cycles
                .iter()
                .any(|g| g.period == cyc.period && (g.multiplier - cyc.multiplier).norm() < 1e-8));
        }
    }

    #[test]
    fn circle_mode_rejected_off_circle() {
        let f = RationalMap::polynomial(vec![c(0.1, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(cycles(&f, 2, Domain::Circle).is_err());
    }
}
