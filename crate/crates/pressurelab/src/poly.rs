//! Dense complex polynomials (ascending coefficients) and simultaneous root finding.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner.
pub fn eval_d(p: &[C64], z: C64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut dv = C64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn sub(p: &[C64], q: &[C64]) -> Vec<C64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| {
            p.get(k).copied().unwrap_or_default() - q.get(k).copied().unwrap_or_default()
        })
        .collect()
}

pub fn scale(p: &[C64], c: C64) -> Vec<C64> {
    p.iter().map(|&x| x * c).collect()
}

/// Drops leading coefficients whose modulus is below `tol` times the largest one.
pub fn trim(p: &[C64], tol: f64) -> Vec<C64> {
    let big = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut v = p.to_vec();
    while let Some(last) = v.last() {
        if last.norm() <= tol * big && v.len() > 1 {
            v.pop();
        } else {
            break;
        }
    }
    v
}

pub fn degree(p: &[C64]) -> usize {
    p.len().saturating_sub(1)
}

/// Monic-free product Π (z - r_i) scaled by `lead`.
pub fn from_roots(roots: &[C64], lead: C64) -> Vec<C64> {
    let mut p = vec![lead];
    for &r in roots {
        p = mul(&p, &[-r, C64::new(1.0, 0.0)]);
    }
    p
}

/// All roots of `p` by Aberth–Ehrlich iteration, seeded deterministically from `seed`,
/// followed by a Newton polish. Zero roots at the origin are split off exactly.
pub fn roots(p: &[C64], seed: u64) -> Vec<C64> {
    let p = trim(p, 1e-14);
    let mut zeros_at_origin = 0;
    let mut start = 0;
    while start + 1 < p.len() && p[start] == C64::new(0.0, 0.0) {
        zeros_at_origin += 1;
        start += 1;
    }
    let q: Vec<C64> = p[start..].to_vec();
    let mut out = vec![C64::new(0.0, 0.0); zeros_at_origin];
    let n = degree(&q);
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(-q[0] / q[1]);
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for attempt in 0..6 {
        let z = aberth_once(&q, &mut rng, attempt);
        let worst = z
            .iter()
            .map(|&r| eval(&q, r).norm() / scale_at(&q, r))
            .fold(0.0, f64::max);
        if best.as_ref().map_or(true, |b| worst < b.0) {
            best = Some((worst, z));
        }
        if worst < 1e-12 {
            break;
        }
    }
    let mut z = best.map(|b| b.1).unwrap_or_default();
    let dq = derivative(&q);
    for r in z.iter_mut() {
        for _ in 0..3 {
            let f = eval(&q, *r);
            let df = eval(&dq, *r);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    out.extend(z);
    out
}

fn scale_at(p: &[C64], z: C64) -> f64 {
    let r = z.norm();
    p.iter()
        .rev()
        .fold(0.0, |acc, c| acc * r + c.norm())
        .max(f64::MIN_POSITIVE)
}

fn aberth_once(p: &[C64], rng: &mut ChaCha8Rng, attempt: usize) -> Vec<C64> {
    let n = degree(p);
    let lead = p[n];
    // Cauchy-type radius bound for the initial circle.
    let radius = p[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| (c / lead).norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let offset: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let jitter = 0.1 * attempt as f64;
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = offset + std::f64::consts::TAU * (k as f64 + 0.25) / n as f64;
            let rad = radius * (0.7 + 0.3 * rng.gen::<f64>() + jitter);
            C64::from_polar(rad, ang)
        })
        .collect();
    let dp = derivative(p);
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let f = eval(p, z[i]);
            let df = eval(&dp, z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / df;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn horner_matches_naive() {
        let p = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)];
        let z = c(0.3, -0.7);
        let naive: C64 = p.iter().enumerate().map(|(k, a)| a * z.powu(k as u32)).sum();
        assert!((eval(&p, z) - naive).norm() < 1e-14);
        let (_, d) = eval_d(&p, z);
        assert!((d - eval(&derivative(&p), z)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let mut p = vec![c(0.0, 0.0); 6];
        p[0] = c(-1.0, 0.0);
        p[5] = c(1.0, 0.0);
        let r = roots(&p, 7);
        assert_eq!(r.len(), 5);
        for z in &r {
            assert!((z.powu(5) - 1.0).norm() < 1e-12);
        }
        for i in 0..5 {
            for j in 0..i {
                assert!((r[i] - r[j]).norm() > 0.5);
            }
        }
    }

    #[test]
    fn roots_with_origin() {
        let p = from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(1.5, -0.2), c(-0.3, 0.4)], c(2.0, 0.0));
        let mut r = roots(&p, 1);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_eq!(r.len(), 4);
        assert!((r[0] - c(-0.3, 0.4)).norm() < 1e-12);
        assert!(r[1].norm() < 1e-12 && r[2].norm() < 1e-12);
        assert!((r[3] - c(1.5, -0.2)).norm() < 1e-12);
    }

    #[test]
    fn roots_deterministic() {
        let p = from_roots(&[c(0.1, 0.2), c(2.0, -1.0), c(-1.0, 0.0)], c(1.0, 0.0));
        assert_eq!(roots(&p, 42), roots(&p, 42));
    }
}
