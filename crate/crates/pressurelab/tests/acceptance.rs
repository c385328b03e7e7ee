//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use num_complex::Complex64 as C;
use pressurelab::continuation::ParamPath;
use pressurelab::maps::{
    blaschke, certify_component, involution, qb, tangent_decompose, CertifyOptions, CycleCatalog, QbPoint,
    RationalMap, TangentVector,
};
use pressurelab::metric::{self, Verdict};
use pressurelab::parallel::with_workers;
use pressurelab::report::to_json;
use pressurelab::symbolic::{enumerate_cylinders, SubshiftSpec, DEFAULT_CAP};
use pressurelab::thermo::{self, CylinderTable, Ensemble, Potential, VarianceOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::time::{Duration, Instant};

/// Var of the centered symbol indicator under Bernoulli(0.3, 0.7): 2e6 simulated
/// paths of length 100 (numpy default_rng, seed 20261015), standard error 2.1e-4.
const BERNOULLI_VAR_MC: f64 = 0.210109083141439;

const SEED: u64 = 20261015;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn dir(da: C, db: C) -> TangentVector {
    TangentVector::new(vec![da], vec![db])
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn per_symbol(spec: &SubshiftSpec, v: &[f64]) -> Potential {
    Potential::CylinderTable(CylinderTable::from_symbols(spec.clone(), v.to_vec()).unwrap())
}

fn power(d: usize) -> RationalMap {
    let mut coeffs = vec![c(0.0, 0.0); d + 1];
    coeffs[d] = c(1.0, 0.0);
    RationalMap::polynomial(coeffs).unwrap()
}

fn pressure_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        for cst in [-1.3, 0.0, 0.7] {
            let spec = SubshiftSpec::full_shift(d);
            let table = CylinderTable::constant(spec, cst);
            let want = (d as f64).ln() + cst;
            let orbit = thermo::pressure(&Potential::CylinderTable(table.clone()), 10).map_err(err)?;
            let matrix = thermo::pressure_matrix(&table, 1).map_err(err)?;
            worst = worst.max((orbit.pressure - want).abs()).max((matrix.pressure - want).abs());
        }
    }
    check(worst < 1e-9, format!("max error {worst:.2e}"))
}

fn golden_mean() -> Outcome {
    let spec = SubshiftSpec::golden_mean();
    let zero = CylinderTable::constant(spec, 0.0);
    let want = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let m = thermo::pressure_matrix(&zero, 1).map_err(err)?.pressure;
    let o = thermo::pressure(&Potential::CylinderTable(zero), 20).map_err(err)?.pressure;
    let (em, eo) = ((m - want).abs(), (o - want).abs());
    check(em < 1e-8 && eo < 1e-6, format!("matrix error {em:.2e}, orbit error {eo:.2e}"))
}

fn bernoulli() -> Outcome {
    let spec = SubshiftSpec::full_shift(2);
    let phi = per_symbol(&spec, &[0.3f64.ln(), 0.7f64.ln()]);
    let psi = per_symbol(&spec, &[0.7, -0.3]);
    let ens = Ensemble::symbolic(&spec, 13).map_err(err)?;
    let p = thermo::pressure_on(&ens, &phi, 12, thermo::CONVERGENCE_TOL).map_err(err)?.pressure;
    let v = thermo::variance(&ens, &psi, &phi, 12, &VarianceOptions::default()).map_err(err)?;
    let fd = v.finite_difference.unwrap_or(f64::NAN);
    let rel = (v.variance - fd).abs() / v.variance.abs().max(fd.abs());
    check(
        p.abs() < 1e-9 && v.mean.abs() < 1e-6 && (v.variance - BERNOULLI_VAR_MC).abs() < 1e-3 && rel < 1e-2,
        format!(
            "P = {p:.2e}, mean = {:.2e}, Var = {:.6} (oracle {BERNOULLI_VAR_MC:.6}), cross-check rel {rel:.2e}",
            v.mean, v.variance
        ),
    )
}

fn livsic() -> Outcome {
    let spec = SubshiftSpec::full_shift(2);
    let words = enumerate_cylinders(&spec, 2, DEFAULT_CAP).map_err(err)?;
    let ind = |s: usize| if s == 0 { 1.0 } else { 0.0 };
    let values = words.iter().map(|w| ind(w.symbols[1]) - ind(w.symbols[0])).collect();
    let cb = Potential::CylinderTable(CylinderTable::new(spec.clone(), 2, values).map_err(err)?);
    let phi = per_symbol(&spec, &[0.3f64.ln(), 0.7f64.ln()]);
    let ens = Ensemble::symbolic(&spec, 12).map_err(err)?;
    let defect = thermo::cohomology_defect(&ens, &cb, 12).map_err(err)?;
    let var = thermo::variance(&ens, &cb, &phi, 11, &VarianceOptions::default())
        .map_err(err)?
        .variance;
    check(defect < 1e-10 && var < 1e-8, format!("defect {defect:.2e}, Var {var:.2e}"))
}

fn dimension_exact() -> Result<(String, serde_json::Value), String> {
    let d2 = metric::hausdorff_dimension(&power(2), 12).map_err(err)?;
    let d3 = metric::hausdorff_dimension(&power(3), 8).map_err(err)?;
    let b = metric::hausdorff_dimension(&blaschke(&[c(0.3, 0.0)]).map_err(err)?, 12).map_err(err)?;
    let ok = (d2.delta - 1.0).abs() < 1e-8 && (d3.delta - 1.0).abs() < 1e-8 && (b.delta - 1.0).abs() < 1e-6;
    let detail = format!(
        "z^2 {:.2e}, z^3 {:.2e}, Blaschke(0.3) {:.2e} from 1",
        d2.delta - 1.0,
        d3.delta - 1.0,
        b.delta - 1.0
    );
    let report = json!({"z2": d2, "z3": d3, "blaschke": b});
    if ok {
        Ok((detail, report))
    } else {
        Err(detail)
    }
}

fn dimension_perturbative() -> Result<(String, serde_json::Value), String> {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut reports = Vec::new();
    for (cst, tol) in [(0.05, 5e-4), (0.1, 1e-3)] {
        let f = RationalMap::polynomial(vec![c(cst, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).map_err(err)?;
        let r = metric::hausdorff_dimension(&f, 14).map_err(err)?;
        let oracle = 1.0 + cst * cst / (4.0 * 2f64.ln());
        let diff = (r.delta - oracle).abs();
        ok &= diff < tol;
        parts.push(format!("c = {cst}: delta {:.10}, oracle {oracle:.10}, diff {diff:.2e}", r.delta));
        reports.push(r);
    }
    let detail = parts.join("; ");
    if ok {
        Ok((detail, json!(reports)))
    } else {
        Err(detail)
    }
}

fn blaschke_minimum() -> Result<(String, serde_json::Value), String> {
    let at = QbPoint::real_diagonal(2, 0.5);
    let base = metric::base_catalog(&ParamPath::tangent(at.clone(), dir(c(1.0, 0.0), c(0.0, 0.0))), 18)
        .map_err(err)?;
    let dirs = [
        dir(c(1.0, 0.0), c(0.0, 0.0)),
        dir(c(0.0, 0.0), c(1.0, 0.0)),
        dir(c(1.0, 0.0), c(0.0, 1.0)),
        dir(c(0.0, 1.0), c(0.0, 1.0)),
    ];
    let mut max_rate = 0.0f64;
    let mut min_delta = f64::INFINITY;
    let mut sweeps = Vec::new();
    for v in dirs {
        let path = ParamPath::tangent(at.clone(), v);
        let sw = metric::sweep(&path, &base, 18, metric::DEFAULT_SWEEP_H, false).map_err(err)?;
        max_rate = max_rate.max(sw.delta_rate.abs());
        min_delta = sw.delta.iter().fold(min_delta, |m, &d| m.min(d));
        sweeps.push(json!({"delta": sw.delta, "rate": sw.delta_rate}));
    }
    let detail = format!("max |d delta/dt| {max_rate:.2e}, min delta - 1 = {:.2e}", min_delta - 1.0);
    if max_rate < 1e-4 && min_delta >= 1.0 - 1e-9 {
        Ok((detail, json!(sweeps)))
    } else {
        Err(detail)
    }
}

fn j_and_b_directions() -> Result<(String, serde_json::Value), String> {
    let at = QbPoint::real_diagonal(2, 0.5);
    let j = ParamPath::tangent(at.clone(), dir(c(0.0, 1.0), c(0.0, 1.0)));
    let b = ParamPath::tangent(at.clone(), dir(c(1.0, 0.0), c(1.0, 0.0)));
    let scan = metric::degeneracy_scan(&j, 8, metric::DEFAULT_SWEEP_H, metric::TOL_DEG).map_err(err)?;
    let j_norm = metric::pressure_seminorm(&j, 12, metric::DEFAULT_SWEEP_H).map_err(err)?;
    let b_norm = metric::pressure_seminorm(&b, 14, metric::DEFAULT_SWEEP_H).map_err(err)?;
    let fixed = b_norm
        .cycles
        .iter()
        .find(|cy| cy.period == 1 && (cy.multiplier[0] - 4.0).abs() < 1e-9)
        .map(|cy| cy.entry)
        .unwrap_or(f64::NAN);
    let ok = scan.max_entry < 1e-4 && j_norm.value < 1e-5 && (fixed - 2.0).abs() < 1e-3 && b_norm.value > 1e-3;
    let detail = format!(
        "J: max entry {:.2e}, norm {:.2e}; B: fixed-point entry {fixed:.9}, norm {:.4}",
        scan.max_entry, j_norm.value, b_norm.value
    );
    let report = json!({"scan": scan, "j": j_norm.value, "b": b_norm.value, "fixed_entry": fixed});
    if ok {
        Ok((detail, report))
    } else {
        Err(detail)
    }
}

fn off_locus() -> Result<(String, serde_json::Value), String> {
    let at = QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]).map_err(err)?;
    let rep = metric::theorem_main_check(&at, &metric::default_directions(1), &Default::default()).map_err(err)?;
    let nondeg = rep.directions.iter().filter(|d| d.verdict == Verdict::Nondegenerate).count();
    let ok = rep.certification.is_certified() && !rep.blaschke && rep.dimension.delta > 1.0 + 1e-5 && nondeg == 8;
    let detail = format!(
        "certified {}, delta {:.9}, {nondeg}/8 directions nondegenerate",
        rep.certification.is_certified(),
        rep.dimension.delta
    );
    let report = serde_json::to_value(&rep).map_err(err)?;
    if ok {
        Ok((detail, report))
    } else {
        Err(detail)
    }
}

fn involution_conjugates() -> Outcome {
    let mut worst = 0.0f64;
    let points = [
        QbPoint::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.05)]).map_err(err)?,
        QbPoint::new(vec![c(-0.2, 0.3)], vec![c(0.1, -0.25)]).map_err(err)?,
        QbPoint::new(vec![c(0.2, 0.1), c(-0.1, 0.2)], vec![c(0.15, 0.0), c(0.05, -0.1)]).map_err(err)?,
    ];
    let mut count = 0;
    for p in &points {
        let c1 = CycleCatalog::build(&qb(p).map_err(err)?, 6, None).map_err(err)?;
        let c2 = CycleCatalog::build(&qb(&involution(p)).map_err(err)?, 6, None).map_err(err)?;
        if c1.cycles.len() != c2.cycles.len() {
            return Err(format!("cycle counts differ: {} vs {}", c1.cycles.len(), c2.cycles.len()));
        }
        let mut used = vec![false; c2.cycles.len()];
        for cy in &c1.cycles {
            let best = c2
                .cycles
                .iter()
                .enumerate()
                .filter(|(j, d)| !used[*j] && d.period == cy.period)
                .map(|(j, d)| (j, (d.multiplier - cy.multiplier.conj()).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((j, dist)) = best else {
                return Err(format!("no partner for a period-{} cycle", cy.period));
            };
            used[j] = true;
            worst = worst.max(dist);
            count += 1;
        }
    }
    check(worst < 1e-8, format!("{count} cycles, max |lambda' - conj(lambda)| {worst:.2e}"))
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut reassembly = 0.0f64;
    let mut j_residue = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(2..=4usize);
        let a: Vec<C> = (0..d - 1)
            .map(|_| C::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let b: Vec<C> = a.iter().map(|x| x.conj()).collect();
        let p = QbPoint::new(a, b).map_err(err)?;
        let mut draw = || -> Vec<C> { (0..d - 1).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
        let v = TangentVector::new(draw(), draw());
        let (w1, w2) = tangent_decompose(&p, &v, 1e-12).map_err(err)?;
        let sum = w1.add(&w2.j());
        reassembly = reassembly.max(sum.sub(&v).norm() / v.norm());
        // J applied to a T B vector (u, conj u)
        let u = draw();
        let tb = TangentVector::new(u.clone(), u.iter().map(|x| x.conj()).collect());
        let (w1, _) = tangent_decompose(&p, &tb.j(), 1e-12).map_err(err)?;
        j_residue = j_residue.max(w1.norm() / tb.norm());
    }
    check(
        reassembly < 1e-14 && j_residue < 1e-14,
        format!("reassembly {reassembly:.2e}, T B part of J-directions {j_residue:.2e}"),
    )
}

fn g_minimum() -> Outcome {
    let at = QbPoint::real_diagonal(2, 0.3);
    let cert = certify_component(&at, &CertifyOptions::default()).map_err(err)?;
    if !cert.is_certified() {
        return Err(format!("base point not certified: {cert:?}"));
    }
    let n = 12;
    let base = CycleCatalog::build(&qb(&at).map_err(err)?, n, None).map_err(err)?;
    let d0 = metric::dimension(&base, n, &Default::default()).map_err(err)?.delta;
    let any = ParamPath::tangent(at.clone(), dir(c(1.0, 0.0), c(1.0, 0.0)));
    let g0 = metric::g_function(&base, d0, &any, 0.0, n).map_err(err)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = dir(c(x[0] / norm, x[1] / norm), c(x[2] / norm, x[3] / norm));
        let r = rng.gen_range(0.5e-2..1e-2);
        let g = metric::g_function(&base, d0, &ParamPath::tangent(at.clone(), v), r, n).map_err(err)?;
        worst = worst.min(g.value - g0);
    }
    check(worst >= -1e-9, format!("G_f(f) = {g0:.12}, min G_f(g) - G_f(f) = {worst:.2e}"))
}

fn metric_reports() -> Result<String, String> {
    let parts = [
        dimension_exact()?.1,
        dimension_perturbative()?.1,
        blaschke_minimum()?.1,
        j_and_b_directions()?.1,
        off_locus()?.1,
    ];
    to_json(&json!(parts)).map_err(err)
}

fn determinism() -> Outcome {
    let one = with_workers(1, metric_reports)?;
    let eight = with_workers(8, metric_reports)?;
    let again = with_workers(8, metric_reports)?;
    check(
        one == eight && eight == again,
        format!("{} bytes, identical across 1/8/8 workers: {}", one.len(), one == eight && eight == again),
    )
}

fn strip<T>(r: Result<(String, T), String>) -> Outcome {
    r.map(|(s, _)| s)
}

fn main() {
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        ("pressure exactness", 1, Box::new(pressure_exactness)),
        ("golden-mean shift", 1, Box::new(golden_mean)),
        ("Bernoulli thermodynamics", 5, Box::new(bernoulli)),
        ("Livsic coboundary", 1, Box::new(livsic)),
        ("dimension exact cases", 10, Box::new(|| strip(dimension_exact()))),
        ("dimension perturbative case", 60, Box::new(|| strip(dimension_perturbative()))),
        ("Blaschke locus minimizes dimension", 60, Box::new(|| strip(blaschke_minimum()))),
        ("J and Blaschke directions", 120, Box::new(|| strip(j_and_b_directions()))),
        ("off-locus nondegeneracy", 120, Box::new(|| strip(off_locus()))),
        ("involution conjugates multipliers", 30, Box::new(involution_conjugates)),
        ("tangent decomposition", 1, Box::new(decomposition)),
        ("G minimum", 60, Box::new(g_minimum)),
        ("determinism", 600, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let dt = t0.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let (ok, detail) = match out {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" over {budget} s budget") };
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.2} s{time_note}]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
