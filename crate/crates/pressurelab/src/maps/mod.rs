//! Rational maps, Blaschke products, the quasi-Blaschke normal form and its
//! coordinates, fixed and critical points.

mod certify;
mod cycles;
mod spec;

pub use certify::{certify_component, Certification, CertifyOptions};
pub use cycles::{cycles, Cycle, CycleCatalog, Domain, TraceWeight};
pub use spec::{ComplexRepr, MapSpec};

use crate::error::{Error, Result};
use crate::poly::{self, C64};
use serde::{Deserialize, Serialize};

/// Default tolerance for membership in the Blaschke locus.
pub const LOCUS_TOL: f64 = 1e-9;

/// Evaluation form carried alongside the coefficients.
#[derive(Debug, Clone, PartialEq)]
enum Form {
    General,
    Polynomial,
    /// scale · z · Π (z − zeros_j) / (1 − poles_inv_j · z)
    Factored { scale: C64, zeros: Vec<C64>, poles_inv: Vec<C64> },
}

/// What the map is known to be; drives cycle enumeration.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    General,
    Polynomial,
    Blaschke { zeros: Vec<C64> },
    QuasiBlaschke(QbPoint),
}

/// A rational map p/q of degree d ≥ 2 (ascending coefficient lists).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    p: Vec<C64>,
    q: Vec<C64>,
    form: Form,
    structure: Structure,
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtPoint {
    Finite(C64),
    Infinity,
}

impl RationalMap {
    /// General map from numerator and denominator coefficients.
    pub fn new(p: Vec<C64>, q: Vec<C64>) -> Result<Self> {
        let p = poly::trim(&p, 0.0);
        let q = poly::trim(&q, 0.0);
        if q.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidInput("denominator is zero".into()));
        }
        let d = poly::degree(&p).max(poly::degree(&q));
        if d < 2 {
            return Err(Error::InvalidInput(format!("degree {d} < 2")));
        }
        if poly::degree(&q) > 0 && poly::degree(&p) > 0 {
            let scale_p = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for r in poly::roots(&q, 0) {
                let s: f64 = p
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * r.norm().max(1.0) + c.norm());
                if poly::eval(&p, r).norm() <= 1e-10 * s.max(scale_p) {
                    return Err(Error::InvalidInput(
                        "numerator and denominator share a factor".into(),
                    ));
                }
            }
        }
        let is_poly = poly::degree(&q) == 0;
        let q0 = q[0];
        let (p, q) = if is_poly {
            (poly::scale(&p, 1.0 / q0), vec![C64::new(1.0, 0.0)])
        } else {
            (p, q)
        };
        Ok(Self {
            p,
            q,
            form: if is_poly { Form::Polynomial } else { Form::General },
            structure: if is_poly {
                Structure::Polynomial
            } else {
                Structure::General
            },
        })
    }

    /// Polynomial from ascending coefficients.
    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(coeffs, vec![C64::new(1.0, 0.0)])
    }

    fn factored(scale: C64, zeros: Vec<C64>, poles_inv: Vec<C64>, structure: Structure) -> Self {
        let mut p = poly::from_roots(&zeros, scale);
        p.insert(0, C64::new(0.0, 0.0));
        let mut q = vec![C64::new(1.0, 0.0)];
        for &b in &poles_inv {
            q = poly::mul(&q, &[C64::new(1.0, 0.0), -b]);
        }
        Self {
            p,
            q,
            form: Form::Factored {
                scale,
                zeros,
                poles_inv,
            },
            structure,
        }
    }

    pub fn numerator(&self) -> &[C64] {
        &self.p
    }

    pub fn denominator(&self) -> &[C64] {
        &self.q
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn degree(&self) -> usize {
        poly::degree(&poly::trim(&self.p, 1e-15)).max(poly::degree(&poly::trim(&self.q, 1e-15)))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.eval_d(z).0
    }

    /// Value and derivative at a finite point.
    pub fn eval_d(&self, z: C64) -> (C64, C64) {
        match &self.form {
            Form::Polynomial => poly::eval_d(&self.p, z),
            Form::General => {
                let (pv, pd) = poly::eval_d(&self.p, z);
                let (qv, qd) = poly::eval_d(&self.q, z);
                (pv / qv, (pd * qv - pv * qd) / (qv * qv))
            }
            Form::Factored {
                scale,
                zeros,
                poles_inv,
            } => {
                let one = C64::new(1.0, 0.0);
                let (mut n, mut dn) = (z, one);
                for &a in zeros {
                    let v = z - a;
                    dn = dn * v + n;
                    n *= v;
                }
                let (mut m, mut dm) = (one, C64::new(0.0, 0.0));
                for &b in poles_inv {
                    let v = one - b * z;
                    dm = dm * v - m * b;
                    m *= v;
                }
                (scale * n / m, scale * (dn * m - n * dm) / (m * m))
            }
        }
    }

    /// Image of a point of the sphere.
    pub fn eval_ext(&self, z: ExtPoint) -> ExtPoint {
        match z {
            ExtPoint::Finite(z) => {
                let qv = poly::eval(&self.q, z);
                if qv.norm() == 0.0 {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(poly::eval(&self.p, z) / qv)
                }
            }
            ExtPoint::Infinity => {
                let dp = poly::degree(&self.p);
                let dq = poly::degree(&self.q);
                if dp > dq {
                    ExtPoint::Infinity
                } else if dp == dq {
                    ExtPoint::Finite(self.p[dp] / self.q[dq])
                } else {
                    ExtPoint::Finite(C64::new(0.0, 0.0))
                }
            }
        }
    }

    /// Multiplier at ∞ when ∞ is fixed (chart w = 1/z).
    pub fn multiplier_at_infinity(&self) -> Option<C64> {
        let dp = poly::degree(&self.p);
        let dq = poly::degree(&self.q);
        if dp == dq + 1 {
            Some(self.q[dq] / self.p[dp])
        } else if dp > dq + 1 {
            Some(C64::new(0.0, 0.0))
        } else {
            None
        }
    }

    /// Fixed points with multiplicity and their multipliers.
    pub fn fixed_points(&self, seed: u64) -> FixedPoints {
        let d = self.degree();
        let num = poly::trim(&poly::sub(&self.p, &poly::mul(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &self.q)), 1e-14);
        let mut roots = poly::roots(&num, seed);
        roots.sort_by(|a, b| cmp_complex(*a, *b));
        let mut points: Vec<(ExtPoint, C64)> = roots
            .iter()
            .map(|&r| (ExtPoint::Finite(r), self.eval_d(r).1))
            .collect();
        let at_inf = (d + 1).saturating_sub(roots.len());
        if at_inf > 0 {
            let m = self.multiplier_at_infinity().unwrap_or(C64::new(1.0, 0.0));
            for _ in 0..at_inf {
                points.push((ExtPoint::Infinity, m));
            }
        }
        let mut warnings = Vec::new();
        for i in 0..roots.len() {
            for j in 0..i {
                if (roots[i] - roots[j]).norm() < 1e-8 {
                    warnings.push(format!(
                        "fixed points {} and {} closer than 1e-8 (parabolic degeneration)",
                        fmt_c(roots[i]),
                        fmt_c(roots[j])
                    ));
                }
            }
        }
        if at_inf > 1 {
            warnings.push("multiple fixed point at infinity".into());
        }
        FixedPoints { points, warnings }
    }

    /// Critical points: zeros of p′q − pq′, plus ∞ for the missing degree.
    pub fn critical_points(&self, seed: u64) -> Vec<ExtPoint> {
        let d = self.degree();
        let dp = poly::derivative(&self.p);
        let dq = poly::derivative(&self.q);
        let num = poly::trim(&poly::sub(&poly::mul(&dp, &self.q), &poly::mul(&self.p, &dq)), 1e-13);
        let mut roots = poly::roots(&num, seed);
        roots.sort_by(|a, b| cmp_complex(*a, *b));
        let mut out: Vec<ExtPoint> = roots.into_iter().map(ExtPoint::Finite).collect();
        while out.len() < 2 * d - 2 {
            out.push(ExtPoint::Infinity);
        }
        out
    }

    /// Lift data when the map preserves the unit circle: rotation angle and zeros in the disk.
    pub(crate) fn circle_form(&self) -> Option<(f64, Vec<C64>)> {
        match (&self.structure, &self.form) {
            (Structure::Blaschke { zeros }, Form::Factored { scale, .. }) => {
                Some((scale.arg(), zeros.clone()))
            }
            (Structure::QuasiBlaschke(pt), Form::Factored { scale, .. }) => {
                if pt.a.iter().all(|a| a.norm() < 1.0) && pt.on_locus_entrywise(LOCUS_TOL) {
                    Some((scale.arg(), pt.a.clone()))
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Result of `fixed_points`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoints {
    pub points: Vec<(ExtPoint, C64)>,
    pub warnings: Vec<String>,
}

pub(crate) fn cmp_complex(a: C64, b: C64) -> std::cmp::Ordering {
    if (a.re - b.re).abs() > 1e-9 {
        a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal)
    } else {
        a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal)
    }
}

pub(crate) fn fmt_c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// Finite Blaschke product z·Π (z − a_i)/(1 − ā_i z) of degree len(a)+1.
pub fn blaschke(a: &[C64]) -> Result<RationalMap> {
    if let Some(x) = a.iter().find(|x| x.norm() >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "Blaschke zero {} is not inside the unit disk",
            fmt_c(*x)
        )));
    }
    let poles_inv: Vec<C64> = a.iter().map(|x| x.conj()).collect();
    Ok(RationalMap::factored(
        C64::new(1.0, 0.0),
        a.to_vec(),
        poles_inv,
        Structure::Blaschke { zeros: a.to_vec() },
    ))
}

/// Normal form Q_{a,b}(z) = Π((1−b_j)/(1−a_j)) · z · Π (z − a_j)/(1 − b_j z).
pub fn qb(point: &QbPoint) -> Result<RationalMap> {
    point.check()?;
    let mut scale = C64::new(1.0, 0.0);
    for (a, b) in point.a.iter().zip(&point.b) {
        scale *= (1.0 - b) / (1.0 - a);
    }
    Ok(RationalMap::factored(
        scale,
        point.a.clone(),
        point.b.clone(),
        Structure::QuasiBlaschke(point.clone()),
    ))
}

/// A point of the quasi-Blaschke space in (a, b) coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QbPoint {
    #[serde(with = "spec::complex_vec")]
    pub a: Vec<C64>,
    #[serde(with = "spec::complex_vec")]
    pub b: Vec<C64>,
    #[serde(default)]
    pub validated: bool,
}

impl QbPoint {
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        let p = Self {
            a,
            b,
            validated: false,
        };
        p.check()?;
        Ok(p)
    }

    /// The real point a = b = (x, …, x) of degree d.
    pub fn real_diagonal(d: usize, x: f64) -> Self {
        let v = vec![C64::new(x, 0.0); d - 1];
        Self {
            a: v.clone(),
            b: v,
            validated: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.a.len() + 1
    }

    fn check(&self) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::InvalidInput("a and b must have equal length".into()));
        }
        if self.a.is_empty() {
            return Err(Error::InvalidInput("degree must be at least 2".into()));
        }
        for (j, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            if (1.0 - a).norm() < 1e-12 || (1.0 - b).norm() < 1e-12 {
                return Err(Error::DenominatorZero(j));
            }
        }
        Ok(())
    }

    /// b_j = conj(a_j) for every j without permutation.
    pub fn on_locus_entrywise(&self, tol: f64) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(a, b)| (b - a.conj()).norm() < tol)
    }

    /// Blaschke symmetrization ((a + b̄)/2, conj of the same).
    pub fn symmetrization(&self) -> QbPoint {
        let m: Vec<C64> = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a + b.conj()) * 0.5)
            .collect();
        QbPoint {
            b: m.iter().map(|x| x.conj()).collect(),
            a: m,
            validated: false,
        }
    }

    pub fn offset(&self, v: &TangentVector, t: f64) -> QbPoint {
        QbPoint {
            a: self.a.iter().zip(&v.da).map(|(a, d)| a + d * t).collect(),
            b: self.b.iter().zip(&v.db).map(|(b, d)| b + d * t).collect(),
            validated: false,
        }
    }

    pub fn distance(&self, other: &QbPoint) -> f64 {
        self.a
            .iter()
            .zip(&other.a)
            .chain(self.b.iter().zip(&other.b))
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Tangent direction (da, db) at a quasi-Blaschke point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    #[serde(with = "spec::complex_vec")]
    pub da: Vec<C64>,
    #[serde(with = "spec::complex_vec")]
    pub db: Vec<C64>,
}

impl TangentVector {
    pub fn new(da: Vec<C64>, db: Vec<C64>) -> Self {
        Self { da, db }
    }

    pub fn zero(len: usize) -> Self {
        Self {
            da: vec![C64::new(0.0, 0.0); len],
            db: vec![C64::new(0.0, 0.0); len],
        }
    }

    /// Multiplication by i entrywise.
    pub fn j(&self) -> Self {
        let i = C64::new(0.0, 1.0);
        Self {
            da: self.da.iter().map(|x| x * i).collect(),
            db: self.db.iter().map(|x| x * i).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            da: self.da.iter().map(|x| x * c).collect(),
            db: self.db.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            da: self.da.iter().zip(&o.da).map(|(x, y)| x + y).collect(),
            db: self.db.iter().zip(&o.db).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scaled(-1.0))
    }

    pub fn norm(&self) -> f64 {
        self.da
            .iter()
            .chain(&self.db)
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
}

/// ([a],[b]) ↦ ([b̄],[ā]).
pub fn involution(point: &QbPoint) -> QbPoint {
    QbPoint {
        a: point.b.iter().map(|x| x.conj()).collect(),
        b: point.a.iter().map(|x| x.conj()).collect(),
        validated: point.validated,
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Pairing π with |b_j − conj(a_{π(j)})| < tol for all j, if one exists.
///
/// Chooses the minimal-cost assignment; errors when a different assignment is also
/// within tolerance and pairs differing values.
pub fn is_blaschke_point(point: &QbPoint, tol: f64) -> Result<Option<Vec<usize>>> {
    let n = point.a.len();
    if n > 8 {
        return Err(Error::InvalidInput("degree too large for exhaustive pairing".into()));
    }
    let mut valid: Vec<(f64, Vec<usize>)> = Vec::new();
    for perm in permutations(n) {
        let dists: Vec<f64> = (0..n)
            .map(|j| (point.b[j] - point.a[perm[j]].conj()).norm())
            .collect();
        if dists.iter().all(|&d| d < tol) {
            valid.push((dists.iter().sum(), perm));
        }
    }
    if valid.is_empty() {
        return Ok(None);
    }
    valid.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let best = &valid[0].1;
    for (_, other) in &valid[1..] {
        let differs = (0..n).any(|j| (point.a[other[j]] - point.a[best[j]]).norm() >= tol);
        if differs {
            return Err(Error::AmbiguousPairing);
        }
    }
    Ok(Some(best.clone()))
}

/// Splits v = w₁ + J·w₂ with w₁ tangent to the Blaschke locus at `point`.
pub fn tangent_decompose(
    point: &QbPoint,
    v: &TangentVector,
    tol: f64,
) -> Result<(TangentVector, TangentVector)> {
    if !point.on_locus_entrywise(tol) {
        return Err(Error::NotBlaschke);
    }
    if v.da.len() != point.a.len() || v.db.len() != point.a.len() {
        return Err(Error::InvalidInput("tangent vector length mismatch".into()));
    }
    let w1 = TangentVector {
        da: v
            .da
            .iter()
            .zip(&v.db)
            .map(|(x, y)| (x + y.conj()) * 0.5)
            .collect(),
        db: v
            .db
            .iter()
            .zip(&v.da)
            .map(|(y, x)| (y + x.conj()) * 0.5)
            .collect(),
    };
    let jw2 = v.sub(&w1);
    let minus_i = C64::new(0.0, -1.0);
    let w2 = TangentVector {
        da: jw2.da.iter().map(|x| x * minus_i).collect(),
        db: jw2.db.iter().map(|x| x * minus_i).collect(),
    };
    Ok((w1, w2))
}
