//! Membership heuristic for the hyperbolic component of z^d in normal-form coordinates.

use super::{qb, ExtPoint, QbPoint};
use crate::error::Result;
use crate::poly::C64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyOptions {
    /// Iteration budget per critical orbit.
    pub budget: usize,
    /// Contraction factor required on the certified disks.
    pub contraction: f64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            budget: 2000,
            contraction: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Certification {
    Certified {
        radius_zero: f64,
        radius_infinity: f64,
        iterations: Vec<usize>,
    },
    /// An attracting cycle other than 0, ∞ was found.
    CertifiedFalse { reason: String },
    Inconclusive { reason: String },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified { .. })
    }
}

/// Largest r (up to a cap) with sup_{|z| ≤ r} |Q(z)|/|z| ≤ contraction, from the
/// factor bound |K|·Π(|a_j| + r)/(1 − |b_j| r).
fn basin_radius(scale: f64, zeros: &[C64], poles: &[C64], c: f64) -> f64 {
    let bound = |r: f64| -> f64 {
        let mut v = scale;
        for a in zeros {
            v *= a.norm() + r;
        }
        for b in poles {
            let den = 1.0 - b.norm() * r;
            if den <= 0.0 {
                return f64::INFINITY;
            }
            v /= den;
        }
        v
    };
    if bound(0.0) > c {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while bound(hi) <= c && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) <= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Certifies that every critical orbit of Q_{a,b} enters a disk around 0 or ∞ on
/// which the map contracts toward that attracting fixed point, with d − 1
/// critical points in each basin.
pub fn certify_component(point: &QbPoint, opts: &CertifyOptions) -> Result<Certification> {
    let f = qb(point)?;
    let d = point.degree();
    let mut scale = C64::new(1.0, 0.0);
    for (a, b) in point.a.iter().zip(&point.b) {
        scale *= (1.0 - b) / (1.0 - a);
    }
    let m0 = point.a.iter().fold(scale, |acc, a| acc * (-a));
    let minf = point.b.iter().fold(C64::new(1.0, 0.0) / scale, |acc, b| acc * (-b));
    if m0.norm() >= 1.0 || minf.norm() >= 1.0 {
        return Ok(Certification::CertifiedFalse {
            reason: format!(
                "fixed point {} is not attracting (|multiplier| = {:.6})",
                if m0.norm() >= 1.0 { "0" } else { "inf" },
                m0.norm().max(minf.norm())
            ),
        });
    }
    let r0 = basin_radius(scale.norm(), &point.a, &point.b, opts.contraction);
    // Chart w = 1/z: g(w) = (w/K)·Π (w − b_j)/(1 − a_j w).
    let rinf = basin_radius(1.0 / scale.norm(), &point.b, &point.a, opts.contraction);
    if r0 <= 0.0 || rinf <= 0.0 {
        return Ok(Certification::Inconclusive {
            reason: "no certified disk around an attracting fixed point".into(),
        });
    }
    let crit = f.critical_points(opts.seed);
    let mut to_zero = 0usize;
    let mut to_inf = 0usize;
    let mut iterations = Vec::new();
    for cp in crit {
        let mut z = match cp {
            ExtPoint::Infinity => {
                to_inf += 1;
                iterations.push(0);
                continue;
            }
            ExtPoint::Finite(z) => z,
        };
        let mut landed = None;
        let mut orbit = Vec::with_capacity(opts.budget);
        for it in 0..=opts.budget {
            if z.norm() < r0 {
                landed = Some((0, it));
                break;
            }
            if z.norm() > 1.0 / rinf || !z.re.is_finite() {
                landed = Some((1, it));
                break;
            }
            orbit.push(z);
            z = f.eval(z);
        }
        match landed {
            Some((0, it)) => {
                to_zero += 1;
                iterations.push(it);
            }
            Some((_, it)) => {
                to_inf += 1;
                iterations.push(it);
            }
            None => {
                if let Some((p, lam)) = detect_cycle(&f, &orbit) {
                    if lam.norm() < 1.0 {
                        return Ok(Certification::CertifiedFalse {
                            reason: format!(
                                "critical orbit converges to an attracting {p}-cycle (|multiplier| = {:.3e})",
                                lam.norm()
                            ),
                        });
                    }
                }
                return Ok(Certification::Inconclusive {
                    reason: format!("critical orbit undecided after {} iterations", opts.budget),
                });
            }
        }
    }
    if to_zero != d - 1 || to_inf != d - 1 {
        return Ok(Certification::Inconclusive {
            reason: format!(
                "critical points split {to_zero} (basin of 0) / {to_inf} (basin of inf), expected {} each",
                d - 1
            ),
        });
    }
    Ok(Certification::Certified {
        radius_zero: r0,
        radius_infinity: rinf,
        iterations,
    })
}

fn detect_cycle(f: &super::RationalMap, orbit: &[C64]) -> Option<(usize, C64)> {
    let z = *orbit.last()?;
    for p in 1..=64.min(orbit.len().saturating_sub(1)) {
        let back = orbit[orbit.len() - 1 - p];
        if (back - z).norm() < 1e-9 * (1.0 + z.norm()) {
            let mut lam = C64::new(1.0, 0.0);
            let mut w = z;
            for _ in 0..p {
                let (v, dv) = f.eval_d(w);
                lam *= dv;
                w = v;
            }
            return Some((p, lam));
        }
    }
    None
}

impl QbPoint {
    /// Runs `certify_component` and marks the point validated on success.
    pub fn validate(mut self, opts: &CertifyOptions) -> Result<(Self, Certification)> {
        let cert = certify_component(&self, opts)?;
        self.validated = cert.is_certified();
        Ok((self, cert))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn power_map_certified() {
        let p = QbPoint::real_diagonal(2, 0.0);
        assert!(certify_component(&p, &CertifyOptions::default()).unwrap().is_certified());
        let p3 = QbPoint::real_diagonal(3, 0.0);
        assert!(certify_component(&p3, &CertifyOptions::default()).unwrap().is_certified());
    }

    #[test]
    fn small_perturbation_certified() {
        let p = QbPoint::new(vec![c(0.0, 0.1)], vec![c(0.05, 0.0)]).unwrap();
        assert!(certify_component(&p, &CertifyOptions::default()).unwrap().is_certified());
    }

    #[test]
    fn test_points_certified() {
        for p in [
            QbPoint::real_diagonal(2, 0.5),
            QbPoint::real_diagonal(2, 0.3),
            QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).unwrap(),
        ] {
            let (p, cert) = p.validate(&CertifyOptions::default()).unwrap();
            assert!(p.validated, "{cert:?}");
        }
    }

    #[test]
    fn repelling_origin_is_false() {
        // K = -1, so the multiplier at 0 is 2
        let p = QbPoint::new(vec![c(2.0, 0.0)], vec![c(0.0, 0.0)]).unwrap();
        let cert = certify_component(&p, &CertifyOptions::default()).unwrap();
        assert!(matches!(cert, Certification::CertifiedFalse { .. }));
    }

    #[test]
    fn stress_never_falsely_certified() {
        for k in 0..8 {
            let th = k as f64 * 0.7;
            let p = QbPoint::new(vec![C64::from_polar(0.99, th)], vec![c(0.0, 0.0)]).unwrap();
            let cert = certify_component(&p, &CertifyOptions { budget: 200, ..Default::default() }).unwrap();
            if cert.is_certified() {
                // when certified, every critical orbit really lands in a contracting disk
                let f = qb(&p).unwrap();
                for cp in f.critical_points(0) {
                    if let ExtPoint::Finite(mut z) = cp {
                        for _ in 0..400 {
                            z = f.eval(z);
                        }
                        assert!(z.norm() < 1e-6 || z.norm() > 1e6);
                    }
                }
            }
        }
    }
}
