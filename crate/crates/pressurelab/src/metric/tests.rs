use super::*;
use crate::maps::{blaschke, qb, QbPoint, RationalMap, TangentVector};
use crate::poly::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn power(d: usize) -> RationalMap {
    let mut coeffs = vec![c(0.0, 0.0); d + 1];
    coeffs[d] = c(1.0, 0.0);
    RationalMap::polynomial(coeffs).unwrap()
}

fn dir(da: C64, db: C64) -> TangentVector {
    TangentVector::new(vec![da], vec![db])
}

fn blaschke_direction(x: f64) -> ParamPath {
    ParamPath::tangent(QbPoint::real_diagonal(2, x), dir(c(1.0, 0.0), c(1.0, 0.0)))
}

#[test]
fn power_maps_have_dimension_one() {
    for (d, n) in [(2usize, 10usize), (3, 7)] {
        let r = hausdorff_dimension(&power(d), n).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-8, "d={d} {}", r.delta);
        assert!(r.residual < 1e-10);
        assert!(r.bracket.0 <= r.delta && r.delta <= r.bracket.1);
        assert!((r.lyapunov - (d as f64).ln()).abs() < 1e-8);
    }
}

#[test]
fn blaschke_dimension_is_one() {
    let f = blaschke(&[c(0.3, 0.0)]).unwrap();
    let r = hausdorff_dimension(&f, 10).unwrap();
    assert!((r.delta - 1.0).abs() < 1e-8);
    let ratio = hausdorff_dimension_with(
        &f,
        10,
        &DimensionOptions {
            estimator: DimensionEstimator::Ratio,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((ratio.delta - 1.0).abs() < 5e-3, "{}", ratio.delta);
}

#[test]
fn quadratic_dimension_above_one() {
    let f = RationalMap::polynomial(vec![c(0.05, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let r = hausdorff_dimension(&f, 12).unwrap();
    assert!(r.delta > 1.0);
    assert!((r.delta - (1.0 + 0.0025 / (4.0 * 2f64.ln()))).abs() < 5e-4);
}

#[test]
fn g_at_base_is_lyapunov() {
    let f = power(2);
    let base = CycleCatalog::build(&f, 8, None).unwrap();
    let path = ParamPath::Homotopy {
        from: f.clone(),
        to: RationalMap::polynomial(vec![c(0.01, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
    };
    let g = g_function(&base, 1.0, &path, 0.0, 8).unwrap();
    assert!((g.value - 2f64.ln()).abs() < 1e-12);
    assert!((lyapunov(&base, 1.0, &base, 8).unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn constant_path_has_zero_seminorm() {
    let path = ParamPath::tangent(QbPoint::real_diagonal(2, 0.3), TangentVector::zero(1));
    let r = pressure_seminorm(&path, 10, DEFAULT_SWEEP_H).unwrap();
    assert!(r.value.abs() < 1e-12);
    assert!(r.cycles.iter().all(|cy| cy.entry.abs() < 1e-12));
}

#[test]
fn blaschke_direction_fixed_point_entry() {
    // λ = 2/(1 − a) at the fixed point 1, so d/dt log λ = 1/(1 − a)
    for x in [0.3, 0.5] {
        let r = pressure_seminorm(&blaschke_direction(x), 14, DEFAULT_SWEEP_H).unwrap();
        let fixed = r
            .cycles
            .iter()
            .find(|cy| cy.period == 1 && (cy.multiplier[0] - 2.0 / (1.0 - x)).abs() < 1e-9)
            .expect("fixed point 1");
        assert!((fixed.entry - 1.0 / (1.0 - x)).abs() < 1e-6, "{}", fixed.entry);
        assert!(r.value > 1e-3);
        assert!(r.dimension_rate.abs() < 1e-6);
    }
}

#[test]
fn j_direction_is_degenerate() {
    let path = ParamPath::tangent(QbPoint::real_diagonal(2, 0.5), dir(c(0.0, 1.0), c(0.0, 1.0)));
    let r = pressure_seminorm(&path, 10, DEFAULT_SWEEP_H).unwrap();
    assert!(r.value < SEMINORM_FLOOR);
    let scan = degeneracy_scan(&path, 8, DEFAULT_SWEEP_H, TOL_DEG).unwrap();
    assert_eq!(scan.verdict, Verdict::Degenerate);
    assert!(scan.cycles.iter().all(|cy| cy.period <= 8));
}

#[test]
fn seminorm_scales_quadratically() {
    let path = blaschke_direction(0.3);
    let base = base_catalog(&path, 12).unwrap();
    let v = pressure_seminorm_on(&path, &base, 12, DEFAULT_SWEEP_H).unwrap().value;
    for k in [2.0, -1.0, 0.5] {
        let scaled = path.reparametrized(k).unwrap();
        let w = pressure_seminorm_on(&scaled, &base, 12, DEFAULT_SWEEP_H).unwrap().value;
        assert!((w - k * k * v).abs() <= 1e-6 * w.abs(), "c={k}: {w} vs {}", k * k * v);
    }
}

#[test]
fn form_is_symmetric_and_matches_seminorm() {
    let at = QbPoint::real_diagonal(2, 0.3);
    let p1 = ParamPath::tangent(at.clone(), dir(c(1.0, 0.0), c(1.0, 0.0)));
    let p2 = ParamPath::tangent(at.clone(), dir(c(1.0, 0.0), c(-0.5, 0.0)));
    let f12 = pressure_form(&p1, &p2, 12, DEFAULT_SWEEP_H).unwrap();
    let f21 = pressure_form(&p2, &p1, 12, DEFAULT_SWEEP_H).unwrap();
    assert!((f12.value - f21.value).abs() < 1e-12);
    let f11 = pressure_form(&p1, &p1, 12, DEFAULT_SWEEP_H).unwrap();
    let s1 = pressure_seminorm(&p1, 12, DEFAULT_SWEEP_H).unwrap();
    assert!((f11.value - s1.value).abs() < 1e-10 * s1.value);
    assert!(f12.value.powi(2) <= f12.first * f12.second * (1.0 + 1e-9));
    let other = ParamPath::tangent(QbPoint::real_diagonal(2, 0.4), dir(c(1.0, 0.0), c(1.0, 0.0)));
    assert!(pressure_form(&p1, &other, 10, DEFAULT_SWEEP_H).is_err());
}

#[test]
fn g_hessian_matches_seminorm() {
    let path = blaschke_direction(0.3);
    let r = pressure_seminorm(&path, 12, DEFAULT_SWEEP_H).unwrap();
    let hess = g_second_difference(&path, 12, 1e-2).unwrap();
    let want = r.value * r.denominator;
    assert!((hess - want).abs() < 5e-2 * want, "{hess} vs {want}");
}

#[test]
fn off_locus_point_is_nondegenerate() {
    let at = QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).unwrap();
    let path = ParamPath::tangent(at.clone(), dir(c(0.0, 1.0), c(0.0, 1.0)));
    let scan = degeneracy_scan(&path, 6, DEFAULT_SWEEP_H, TOL_DEG).unwrap();
    assert_eq!(scan.verdict, Verdict::Nondegenerate);
    let d = hausdorff_dimension(&qb(&at).unwrap(), 12).unwrap();
    assert!(d.delta > 1.0 + 1e-5);
}

#[test]
fn verdict_bands() {
    assert_eq!(verdict(1e-5, 1e-4), Verdict::Degenerate);
    assert_eq!(verdict(5e-4, 1e-4), Verdict::Inconclusive);
    assert_eq!(verdict(2e-3, 1e-4), Verdict::Nondegenerate);
}

#[test]
fn default_directions_cover_j_and_b() {
    let dirs = default_directions(1);
    assert_eq!(dirs.len(), 8);
    assert!(dirs.contains(&dir(c(0.0, 1.0), c(0.0, 1.0))));
    assert!(dirs.contains(&dir(c(1.0, 0.0), c(1.0, 0.0))));
}
