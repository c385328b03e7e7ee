//! Subshifts of finite type: admissible words, cylinders and periodic points.
//!
//! Symbols are stored 0-based; `Display` prints them 1-based.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_CAP: u128 = 10_000_000;

/// Alphabet size and 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct SubshiftSpec {
    n: usize,
    a: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<u8>>,
}

impl TryFrom<RawSpec> for SubshiftSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        SubshiftSpec::new(r.n, r.a)
    }
}

impl From<SubshiftSpec> for RawSpec {
    fn from(s: SubshiftSpec) -> Self {
        RawSpec { n: s.n, a: s.a }
    }
}

impl SubshiftSpec {
    pub fn new(n: usize, a: Vec<Vec<u8>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("alphabet must be nonempty".into()));
        }
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!("transition matrix must be {n}x{n}")));
        }
        if a.iter().flatten().any(|&x| x > 1) {
            return Err(Error::InvalidInput("transition matrix entries must be 0 or 1".into()));
        }
        for i in 0..n {
            if a[i].iter().all(|&x| x == 0) {
                return Err(Error::InvalidInput(format!("row {} is all zero", i + 1)));
            }
            if (0..n).all(|r| a[r][i] == 0) {
                return Err(Error::InvalidInput(format!("column {} is all zero", i + 1)));
            }
        }
        Ok(Self { n, a })
    }

    pub fn full_shift(n: usize) -> Self {
        Self::new(n, vec![vec![1; n]; n]).expect("full shift is valid")
    }

    pub fn golden_mean() -> Self {
        Self::new(2, vec![vec![1, 1], vec![1, 0]]).expect("golden mean is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.a
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.a[i][j] == 1
    }

    pub fn is_admissible(&self, w: &Word) -> bool {
        w.symbols.iter().all(|&s| s < self.n)
            && w.symbols.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    /// Admissible as a periodic point: the word wraps around.
    pub fn is_periodic_admissible(&self, w: &Word) -> bool {
        match (w.symbols.first(), w.symbols.last()) {
            (Some(&f), Some(&l)) => self.is_admissible(w) && self.allowed(l, f),
            _ => false,
        }
    }

    fn int_matrix(&self) -> Vec<Vec<u128>> {
        self.a
            .iter()
            .map(|r| r.iter().map(|&x| x as u128).collect())
            .collect()
    }

    /// A^k with saturating integer arithmetic.
    pub fn power(&self, k: usize) -> Vec<Vec<u128>> {
        let n = self.n;
        let mut acc: Vec<Vec<u128>> = (0..n)
            .map(|i| (0..n).map(|j| u128::from(i == j)).collect())
            .collect();
        let base = self.int_matrix();
        for _ in 0..k {
            acc = sat_mul(&acc, &base);
        }
        acc
    }

    /// Number of admissible words of length k: 1ᵀ A^{k−1} 1.
    pub fn cylinder_count(&self, k: usize) -> u128 {
        if k == 0 {
            return 1;
        }
        self.power(k - 1)
            .iter()
            .flatten()
            .fold(0u128, |a, &b| a.saturating_add(b))
    }

    /// trace(A^n): number of points with σⁿx = x.
    pub fn periodic_count(&self, n: usize) -> u128 {
        let p = self.power(n);
        (0..self.n).fold(0u128, |a, i| a.saturating_add(p[i][i]))
    }
}

fn sat_mul(x: &[Vec<u128>], y: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let n = x.len();
    let mut out = vec![vec![0u128; n]; n];
    for i in 0..n {
        for k in 0..n {
            if x[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] = out[i][j].saturating_add(x[i][k].saturating_mul(y[k][j]));
            }
        }
    }
    out
}

/// Finite word over the alphabet (0-based symbols).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<usize>,
}

impl Word {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self { symbols }
    }

    /// Builds a word from 1-based symbols.
    pub fn from_one_based(symbols: &[usize]) -> Self {
        Self {
            symbols: symbols.iter().map(|&s| s - 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Least p with the word invariant under rotation by p.
    pub fn minimal_period(&self) -> usize {
        let n = self.len();
        (1..=n)
            .find(|&p| n % p == 0 && (0..n).all(|i| self.symbols[i] == self.symbols[(i + p) % n]))
            .unwrap_or(n)
    }

    /// True if no proper rotation is lexicographically smaller.
    pub fn is_least_rotation(&self) -> bool {
        let n = self.len();
        (1..n).all(|r| {
            for i in 0..n {
                let a = self.symbols[(i + r) % n];
                let b = self.symbols[i];
                if a != b {
                    return a > b;
                }
            }
            true
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            if self.symbols.len() > 1 && s >= 9 {
                write!(f, "[{}]", s + 1)?;
            } else {
                write!(f, "{}", s + 1)?;
            }
        }
        Ok(())
    }
}

/// Least k ≤ n² with A^k entrywise positive, or `None` when no such k exists.
pub fn is_aperiodic(spec: &SubshiftSpec) -> Option<usize> {
    let n = spec.n;
    let base: Vec<Vec<bool>> = spec
        .a
        .iter()
        .map(|r| r.iter().map(|&x| x == 1).collect())
        .collect();
    let mut acc = base.clone();
    for k in 1..=n * n {
        if acc.iter().flatten().all(|&b| b) {
            return Some(k);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for m in 0..n {
                if acc[i][m] {
                    for j in 0..n {
                        next[i][j] |= base[m][j];
                    }
                }
            }
        }
        acc = next;
    }
    None
}

fn check_cap(what: &str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::ResourceCap {
            what: what.into(),
            needed,
            cap,
        })
    } else {
        Ok(())
    }
}

/// Depth-first walk of admissible words of length `k` in lexicographic order.
fn walk(spec: &SubshiftSpec, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let n = spec.n;
    let mut stack: Vec<usize> = vec![0];
    loop {
        let depth = stack.len();
        let top = *stack.last().unwrap();
        if top >= n {
            stack.pop();
            match stack.last_mut() {
                Some(t) => *t += 1,
                None => return,
            }
            continue;
        }
        let ok = depth == 1 || spec.allowed(stack[depth - 2], top);
        if !ok {
            *stack.last_mut().unwrap() += 1;
            continue;
        }
        if depth == k {
            visit(&stack);
            *stack.last_mut().unwrap() += 1;
        } else {
            stack.push(0);
        }
    }
}

/// All admissible words of length `k`, sorted.
pub fn enumerate_cylinders(spec: &SubshiftSpec, k: usize, cap: u128) -> Result<Vec<Word>> {
    if k == 0 {
        return Err(Error::InvalidInput("cylinder depth must be at least 1".into()));
    }
    let expected = spec.cylinder_count(k);
    check_cap("cylinders", expected, cap)?;
    let mut out = Vec::with_capacity(expected as usize);
    walk(spec, k, |w| out.push(Word::new(w.to_vec())));
    if out.len() as u128 != expected {
        return Err(Error::Data(format!(
            "cylinder enumeration produced {} words, matrix count {}",
            out.len(),
            expected
        )));
    }
    Ok(out)
}

/// One word per point x with σⁿx = x (or, with `exact`, with least period n), sorted.
pub fn enumerate_periodic_words(
    spec: &SubshiftSpec,
    n: usize,
    exact: bool,
    cap: u128,
) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    let expected = spec.periodic_count(n);
    check_cap("periodic words", expected, cap)?;
    let mut out = Vec::new();
    walk(spec, n, |w| {
        if spec.allowed(w[n - 1], w[0]) {
            out.push(Word::new(w.to_vec()));
        }
    });
    if out.len() as u128 != expected {
        return Err(Error::Data(format!(
            "periodic enumeration produced {} words, trace count {}",
            out.len(),
            expected
        )));
    }
    if exact {
        out.retain(|w| w.minimal_period() == n);
    }
    Ok(out)
}

/// Primitive periodic orbits of every period 1..=max_period, one least-rotation
/// representative each, ordered by period then lexicographically.
pub fn primitive_orbits(spec: &SubshiftSpec, max_period: usize, cap: u128) -> Result<Vec<Word>> {
    let total: u128 = (1..=max_period).fold(0u128, |a, p| a.saturating_add(spec.periodic_count(p)));
    check_cap("periodic words", total, cap)?;
    let mut out = Vec::new();
    for p in 1..=max_period {
        walk(spec, p, |w| {
            if spec.allowed(w[p - 1], w[0]) {
                let word = Word::new(w.to_vec());
                if word.minimal_period() == p && word.is_least_rotation() {
                    out.push(word);
                }
            }
        });
    }
    Ok(out)
}
