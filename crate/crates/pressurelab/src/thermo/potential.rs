use crate::continuation::{dlog_multiplier, ParamPath, PathSpec};
use crate::error::{Error, Result};
use crate::maps::{Cycle, MapSpec, RationalMap};
use crate::symbolic::{enumerate_cylinders, SubshiftSpec, Word, DEFAULT_CAP};
use serde::{Deserialize, Serialize};

/// Values of a potential on the admissible words of a fixed depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTable {
    spec: SubshiftSpec,
    depth: usize,
    values: Vec<f64>,
    // base-n code of a word -> value; NaN where inadmissible
    dense: Vec<f64>,
}

impl CylinderTable {
    /// `values` follow `enumerate_cylinders(spec, depth)` order.
    pub fn new(spec: SubshiftSpec, depth: usize, values: Vec<f64>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidInput("table depth must be at least 1".into()));
        }
        let n = spec.n();
        let size = (n as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
        if size > DEFAULT_CAP {
            return Err(Error::ResourceCap {
                what: "cylinder table".into(),
                needed: size,
                cap: DEFAULT_CAP,
            });
        }
        let words = enumerate_cylinders(&spec, depth, DEFAULT_CAP)?;
        if words.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "table has {} values but there are {} admissible words of length {depth}",
                values.len(),
                words.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table values must be finite".into()));
        }
        let mut dense = vec![f64::NAN; size as usize];
        for (w, &v) in words.iter().zip(&values) {
            dense[code(n, &w.symbols)] = v;
        }
        Ok(Self {
            spec,
            depth,
            values,
            dense,
        })
    }

    /// Table for a function of the first symbol only.
    pub fn from_symbols(spec: SubshiftSpec, per_symbol: Vec<f64>) -> Result<Self> {
        Self::new(spec, 1, per_symbol)
    }

    /// Constant potential at depth 1.
    pub fn constant(spec: SubshiftSpec, c: f64) -> Self {
        let n = spec.n();
        Self::new(spec, 1, vec![c; n]).expect("depth-1 table")
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on the cylinder given by the first `depth` symbols of `w`.
    pub fn value(&self, w: &[usize]) -> Option<f64> {
        if w.len() < self.depth || w.iter().any(|&s| s >= self.spec.n()) {
            return None;
        }
        let v = self.dense[code(self.spec.n(), &w[..self.depth])];
        v.is_finite().then_some(v)
    }

    fn periodic_sum(&self, w: &Word) -> Result<f64> {
        if !self.spec.is_periodic_admissible(w) {
            return Err(Error::Domain(format!("word {w} is not a periodic orbit of the subshift")));
        }
        let p = w.len();
        let mut window = vec![0usize; self.depth];
        let mut s = 0.0;
        for i in 0..p {
            for (j, x) in window.iter_mut().enumerate() {
                *x = w.symbols[(i + j) % p];
            }
            s += self
                .value(&window)
                .ok_or_else(|| Error::Domain(format!("no table value for a window of {w}")))?;
        }
        Ok(s)
    }
}

fn code(n: usize, w: &[usize]) -> usize {
    w.iter().fold(0, |acc, &s| acc * n + s)
}

/// Derivative along a path of the normalized geometric potential, known through
/// its Birkhoff sums on cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDerivative {
    pub path: ParamPath,
    /// Finite-difference step for cycle multipliers.
    pub h: f64,
    /// Dimension at t = 0.
    pub base_dimension: f64,
    /// dδ/dt at t = 0.
    pub dimension_rate: f64,
}

impl PathDerivative {
    /// −d/dt [δ(t)·log|λ_C(t)|] at t = 0, given the multiplier derivative.
    pub fn cycle_value(&self, multiplier: f64, dlog_real: f64) -> f64 {
        -(self.dimension_rate * multiplier.ln() + self.base_dimension * dlog_real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// −s·log|f′| on the Julia set.
    Geometric { map: RationalMap, s: f64 },
    CylinderTable(CylinderTable),
    PathDerivative(PathDerivative),
    /// Flat linear combination.
    Linear(Vec<(f64, Potential)>),
}

/// A periodic orbit of either kind of system.
#[derive(Debug, Clone, Copy)]
pub enum Orbit<'a> {
    Word(&'a Word),
    Cycle(&'a Cycle),
}

impl Potential {
    pub fn geometric(map: RationalMap, s: f64) -> Self {
        Potential::Geometric { map, s }
    }

    /// Builds a flattened linear combination.
    pub fn linear(terms: Vec<(f64, Potential)>) -> Self {
        let mut flat = Vec::new();
        for (c, p) in terms {
            match p {
                Potential::Linear(inner) => {
                    for (c2, q) in inner {
                        flat.push((c * c2, q));
                    }
                }
                other => flat.push((c, other)),
            }
        }
        Potential::Linear(flat)
    }

    /// The subshift underlying a symbolic potential.
    pub fn subshift(&self) -> Option<&SubshiftSpec> {
        match self {
            Potential::CylinderTable(t) => Some(t.spec()),
            Potential::Linear(terms) => terms.iter().find_map(|(_, p)| p.subshift()),
            _ => None,
        }
    }

    /// The map underlying a geometric potential.
    pub fn map(&self) -> Option<&RationalMap> {
        match self {
            Potential::Geometric { map, .. } => Some(map),
            Potential::Linear(terms) => terms.iter().find_map(|(_, p)| p.map()),
            _ => None,
        }
    }

    /// S_pφ over one traversal of the orbit.
    pub fn birkhoff_sum(&self, orbit: Orbit<'_>) -> Result<f64> {
        match (self, orbit) {
            (Potential::Geometric { map, s }, Orbit::Cycle(c)) => {
                let mut acc = 0.0;
                for &z in &c.points {
                    let d = map.eval_d(z).1.norm();
                    if d == 0.0 || !d.is_finite() {
                        return Err(Error::Domain(format!(
                            "derivative vanishes or is undefined on the orbit at {z}"
                        )));
                    }
                    acc += d.ln();
                }
                Ok(-s * acc)
            }
            (Potential::CylinderTable(t), Orbit::Word(w)) => t.periodic_sum(w),
            (Potential::PathDerivative(pd), Orbit::Cycle(c)) => {
                let dl = dlog_multiplier(&pd.path, c, pd.h)?;
                Ok(pd.cycle_value(c.multiplier.norm(), dl.real))
            }
            (Potential::Linear(terms), o) => {
                let mut acc = 0.0;
                for (c, p) in terms {
                    acc += c * p.birkhoff_sum(o)?;
                }
                Ok(acc)
            }
            (_, Orbit::Word(_)) => Err(Error::Domain("map potential evaluated on a symbolic word".into())),
            (_, Orbit::Cycle(_)) => Err(Error::Domain("symbolic potential evaluated on a map cycle".into())),
        }
    }

    /// Largest |value| of a tabulated potential, or None when only Birkhoff sums are known.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Potential::CylinderTable(t) => Some(t.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))),
            Potential::Linear(terms) => terms
                .iter()
                .try_fold(0.0, |acc, (c, p)| p.sup_norm().map(|s| acc + c.abs() * s)),
            _ => None,
        }
    }
}

/// JSON form of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    Geometric {
        map: MapSpec,
        #[serde(default = "one")]
        s: f64,
    },
    CylinderTable {
        spec: SubshiftSpec,
        depth: usize,
        values: Vec<f64>,
    },
    PathDerivative {
        path: PathSpec,
        /// Period for the dimension solve.
        period: usize,
        #[serde(default)]
        h: Option<f64>,
    },
    Linear { terms: Vec<LinearTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub coef: f64,
    pub potential: PotentialSpec,
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        Ok(match self {
            PotentialSpec::Geometric { map, s } => Potential::geometric(map.build()?, *s),
            PotentialSpec::CylinderTable { spec, depth, values } => {
                Potential::CylinderTable(CylinderTable::new(spec.clone(), *depth, values.clone())?)
            }
            PotentialSpec::PathDerivative { path, period, h } => {
                let path: ParamPath = path.clone().into();
                let h = h.unwrap_or_else(|| crate::continuation::default_h(1.0));
                Potential::PathDerivative(crate::metric::path_derivative(&path, *period, h)?)
            }
            PotentialSpec::Linear { terms } => Potential::linear(
                terms
                    .iter()
                    .map(|t| Ok((t.coef, t.potential.build()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::blaschke;
    use crate::poly::C64;

    #[test]
    fn constant_table_sums() {
        let t = Potential::CylinderTable(CylinderTable::constant(SubshiftSpec::full_shift(2), 0.7));
        let w = Word::from_one_based(&[1, 2, 2]);
        assert!((t.birkhoff_sum(Orbit::Word(&w)).unwrap() - 2.1).abs() < 1e-15);
    }

    #[test]
    fn depth_two_windows_wrap() {
        // value on "ij" = 10 i + j (one-based), sum over the cyclic windows of 112
        let spec = SubshiftSpec::full_shift(2);
        let t = CylinderTable::new(spec, 2, vec![11.0, 12.0, 21.0, 22.0]).unwrap();
        let w = Word::from_one_based(&[1, 1, 2]);
        let s = Potential::CylinderTable(t).birkhoff_sum(Orbit::Word(&w)).unwrap();
        assert_eq!(s, 11.0 + 12.0 + 21.0);
    }

    #[test]
    fn geometric_fixed_points() {
        let z2 = RationalMap::polynomial(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let c = Cycle::from_points(&z2, vec![C64::new(1.0, 0.0)]);
        let s = Potential::geometric(z2, 1.0).birkhoff_sum(Orbit::Cycle(&c)).unwrap();
        assert!((s + 2f64.ln()).abs() < 1e-15);

        let b = blaschke(&[C64::new(0.5, 0.0)]).unwrap();
        let c = Cycle::from_points(&b, vec![C64::new(1.0, 0.0)]);
        let s = Potential::geometric(b, 1.0).birkhoff_sum(Orbit::Cycle(&c)).unwrap();
        assert!((s + 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn critical_orbit_is_domain_error() {
        let z2 = RationalMap::polynomial(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let c = Cycle::from_points(&z2, vec![C64::new(0.0, 0.0)]);
        assert!(matches!(
            Potential::geometric(z2, 1.0).birkhoff_sum(Orbit::Cycle(&c)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn linear_is_flattened() {
        let spec = SubshiftSpec::full_shift(2);
        let a = Potential::CylinderTable(CylinderTable::constant(spec.clone(), 1.0));
        let inner = Potential::linear(vec![(2.0, a.clone()), (1.0, a.clone())]);
        let outer = Potential::linear(vec![(0.5, inner), (1.0, a)]);
        match &outer {
            Potential::Linear(t) => {
                assert_eq!(t.len(), 3);
                assert!(t.iter().all(|(_, p)| !matches!(p, Potential::Linear(_))));
            }
            _ => unreachable!(),
        }
        let w = Word::from_one_based(&[1, 2]);
        assert!((outer.birkhoff_sum(Orbit::Word(&w)).unwrap() - 2.0 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn spec_json() {
        let s = r#"{"type":"linear","terms":[
            {"coef":1.0,"potential":{"type":"cylinder_table","spec":{"n":2,"A":[[1,1],[1,1]]},"depth":1,"values":[0.3,0.7]}},
            {"coef":-1.0,"potential":{"type":"cylinder_table","spec":{"n":2,"A":[[1,1],[1,1]]},"depth":1,"values":[0.0,0.0]}}]}"#;
        let p: PotentialSpec = serde_json::from_str(s).unwrap();
        let pot = p.build().unwrap();
        assert_eq!(pot.sup_norm(), Some(0.7));
        let g: PotentialSpec = serde_json::from_str(r#"{"type":"geometric","map":{"type":"poly","coeffs":[0,0,1]}}"#).unwrap();
        assert!(matches!(g.build().unwrap(), Potential::Geometric { s, .. } if s == 1.0));
        let bad = r#"{"type":"cylinder_table","spec":{"n":2,"A":[[1,1],[1,0]]},"depth":2,"values":[1,2,3,4]}"#;
        assert!(serde_json::from_str::<PotentialSpec>(bad).unwrap().build().is_err());
    }
}
