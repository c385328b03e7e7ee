use crate::{exit, CliError, CommandKind, Format, Outcome, RunConfig};
use pressurelab::continuation::{transport_marking, ParamPath, PathSpec};
use pressurelab::maps::{involution, qb, CertifyOptions, CycleCatalog, MapSpec, QbPoint, TangentVector};
use pressurelab::metric::{
    self, default_directions, hausdorff_dimension, hausdorff_dimension_with, DimensionOptions, pressure_form, pressure_seminorm, theorem_main_check, Status,
    TheoremOptions,
};
use pressurelab::parallel::par_range;
use pressurelab::report::{to_csv, to_json, Cell};
use pressurelab::thermo::{pressure_determinant, pressure_matrix, pressure_on, Ensemble, Potential, PotentialSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::bad_input(format!("input spec: {e}")))
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    to_json(value).map_err(|e| CliError {
        code: exit::FAILURE,
        message: format!("serializing report: {e}"),
    })
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn render<T: Serialize>(cfg: &RunConfig, body: T, csv: impl FnOnce(&T) -> String, code: u8) -> Result<Outcome, CliError> {
    let body = match cfg.format {
        Format::Json => json(&Report { config: cfg, body })?,
        Format::Csv => csv(&body),
    };
    Ok(Outcome { body, code })
}

pub fn dispatch(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandKind::Pressure => run_pressure(cfg, text),
        CommandKind::Dimension => run_dimension(cfg, text),
        CommandKind::Norm => run_norm(cfg, text),
        CommandKind::Scan => run_scan(cfg, text),
        CommandKind::Cycles => run_cycles(cfg, text),
        CommandKind::Order => run_order(cfg, text),
        CommandKind::Involution => run_involution(cfg, text),
    }
}

#[derive(Serialize)]
struct PressureRow {
    period: usize,
    pressure: f64,
}

fn run_pressure(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let spec: PotentialSpec = parse(text)?;
    let phi = spec.build()?;
    let n = cfg.period_max;
    if n < 2 {
        return Err(CliError::bad_input("pressure needs --period-max at least 2"));
    }
    let ens = Ensemble::for_potential(&phi, n + 1)?;
    let orbit = pressure_on(&ens, &phi, n, cfg.tol)?;
    let matrix = match (cfg.depth, &phi) {
        (None, _) => None,
        (Some(k), Potential::CylinderTable(t)) => Some(pressure_matrix(t, k)?),
        (Some(_), _) => return Err(CliError::bad_input("--depth applies only to cylinder-table potentials")),
    };
    let determinant = match phi.map() {
        Some(_) => Some(pressure_determinant(&ens, &phi, n)?),
        None => None,
    };
    let convergence = (1..=n)
        .map(|m| pressure_on(&ens, &phi, m, f64::INFINITY).map(|s| PressureRow { period: m, pressure: s.pressure }))
        .collect::<Result<Vec<_>, _>>()?;

    #[derive(Serialize)]
    struct Body {
        orbit: pressurelab::thermo::EquilibriumStats,
        matrix: Option<pressurelab::thermo::EquilibriumStats>,
        determinant: Option<pressurelab::thermo::EquilibriumStats>,
        convergence: Vec<PressureRow>,
    }
    let body = Body {
        orbit,
        matrix,
        determinant,
        convergence,
    };
    render(
        cfg,
        body,
        |b| {
            let rows: Vec<Vec<Cell>> = b.convergence.iter().map(|r| vec![r.period.into(), r.pressure.into()]).collect();
            to_csv(&["period", "pressure"], &rows)
        },
        0,
    )
}

fn run_dimension(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let spec: MapSpec = parse(text)?;
    let f = spec.build()?;
    let opts = DimensionOptions {
        tol: cfg.tol,
        ..Default::default()
    };
    let r = hausdorff_dimension_with(&f, cfg.period_max, &opts)?;
    render(
        cfg,
        r,
        |r| {
            let rows: Vec<Vec<Cell>> = r.convergence.iter().map(|c| vec![c.period.into(), c.delta.into()]).collect();
            to_csv(&["period", "delta"], &rows)
        },
        0,
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormInput {
    path: Option<PathSpec>,
    paths: Option<Vec<PathSpec>>,
}

#[derive(Serialize)]
struct ProfilePoint {
    t: f64,
    delta: f64,
}

fn dimension_profile(path: &ParamPath, n: usize, t_max: f64, grid: usize) -> Result<Vec<ProfilePoint>, CliError> {
    let steps = grid.max(2);
    let ts: Vec<f64> = (0..steps)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / (steps - 1) as f64)
        .collect();
    let deltas = par_range(ts.len(), |i| {
        let f = path.map_at(ts[i])?;
        hausdorff_dimension(&f, n).map(|r| r.delta)
    });
    ts.iter()
        .zip(deltas)
        .map(|(&t, d)| Ok(ProfilePoint { t, delta: d? }))
        .collect()
}

fn cycle_rows(cycles: &[metric::CycleDerivative]) -> String {
    let rows: Vec<Vec<Cell>> = cycles
        .iter()
        .map(|c| {
            vec![
                c.period.into(),
                c.multiplier[0].into(),
                c.multiplier[1].into(),
                c.dlog[0].into(),
                c.dlog[1].into(),
                c.entry.into(),
            ]
        })
        .collect();
    to_csv(
        &["period", "multiplier_re", "multiplier_im", "dlog_re", "dlog_im", "entry"],
        &rows,
    )
}

fn run_norm(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let input: NormInput = parse(text)?;
    let n = cfg.period_max;
    match (input.path, input.paths) {
        (Some(p), None) => {
            let path: ParamPath = p.into();
            let seminorm = pressure_seminorm(&path, n, cfg.h)?;
            let profile = match cfg.t_max {
                Some(t) => Some(dimension_profile(&path, n, t, cfg.grid)?),
                None => None,
            };

            #[derive(Serialize)]
            struct Body {
                seminorm: metric::SeminormResult,
                profile: Option<Vec<ProfilePoint>>,
            }
            render(cfg, Body { seminorm, profile }, |b| cycle_rows(&b.seminorm.cycles), 0)
        }
        (None, Some(ps)) if ps.len() == 2 => {
            let mut it = ps.into_iter().map(ParamPath::from);
            let (p1, p2) = (it.next().unwrap(), it.next().unwrap());
            let form = pressure_form(&p1, &p2, n, cfg.h)?;

            #[derive(Serialize)]
            struct Body {
                form: metric::FormResult,
            }
            render(
                cfg,
                Body { form },
                |b| {
                    let f = &b.form;
                    to_csv(
                        &["period", "value", "covariance", "denominator", "first", "second"],
                        &[vec![
                            f.period.into(),
                            f.value.into(),
                            f.covariance.into(),
                            f.denominator.into(),
                            f.first.into(),
                            f.second.into(),
                        ]],
                    )
                },
                0,
            )
        }
        _ => Err(CliError::bad_input(
            "norm input needs either \"path\" or \"paths\" with exactly two entries",
        )),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanInput {
    point: QbPoint,
    directions: Option<Vec<TangentVector>>,
}

fn run_scan(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let input: ScanInput = parse(text)?;
    let point = QbPoint::new(input.point.a, input.point.b)?;
    let directions = input
        .directions
        .unwrap_or_else(|| default_directions(point.a.len()));
    if let Some(bad) = directions
        .iter()
        .find(|d| d.da.len() != point.a.len() || d.db.len() != point.b.len())
    {
        return Err(CliError::bad_input(format!(
            "direction has {} + {} components, point needs {} + {}",
            bad.da.len(),
            bad.db.len(),
            point.a.len(),
            point.b.len()
        )));
    }
    let opts = TheoremOptions {
        period: cfg.period_max,
        h: cfg.h,
        tol_deg: cfg.tol,
        certify: CertifyOptions {
            seed: cfg.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = theorem_main_check(&point, &directions, &opts)?;
    let code = match report.outcome() {
        Status::Pass => 0,
        Status::Fail => exit::FAILURE,
        Status::Inconclusive => exit::INCONCLUSIVE,
    };
    render(
        cfg,
        report,
        |r| {
            let rows: Vec<Vec<Cell>> = r
                .directions
                .iter()
                .map(|d| {
                    let verdict = serde_json::to_value(d.verdict)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default();
                    let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
                    vec![
                        serde_json::to_string(&d.direction).unwrap_or_default().into(),
                        verdict.into(),
                        d.max_entry.into(),
                        flag(d.pure_j).into(),
                        d.tb_seminorm.map(Cell::from).unwrap_or_else(|| "".into()),
                    ]
                })
                .collect();
            to_csv(&["direction", "verdict", "max_entry", "pure_j", "tb_seminorm"], &rows)
        },
        code,
    )
}

#[derive(Serialize)]
struct CycleRow {
    period: usize,
    point: [f64; 2],
    multiplier: [f64; 2],
    abs: f64,
    repelling: bool,
}

fn run_cycles(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let spec: MapSpec = parse(text)?;
    let f = spec.build()?;
    let catalog = CycleCatalog::build(&f, cfg.period_max, None)?;
    let rows: Vec<CycleRow> = catalog
        .cycles
        .iter()
        .map(|c| CycleRow {
            period: c.period,
            point: [c.points[0].re, c.points[0].im],
            multiplier: [c.multiplier.re, c.multiplier.im],
            abs: c.multiplier.norm(),
            repelling: c.repelling,
        })
        .collect();

    #[derive(Serialize)]
    struct Body {
        domain: pressurelab::maps::Domain,
        cycles: Vec<CycleRow>,
        warnings: Vec<String>,
    }
    let body = Body {
        domain: catalog.domain,
        cycles: rows,
        warnings: catalog.warnings.clone(),
    };
    render(
        cfg,
        body,
        |b| {
            let rows: Vec<Vec<Cell>> = b
                .cycles
                .iter()
                .map(|r| {
                    vec![
                        r.period.into(),
                        r.point[0].into(),
                        r.point[1].into(),
                        r.multiplier[0].into(),
                        r.multiplier[1].into(),
                        r.abs.into(),
                        r.repelling.to_string().into(),
                    ]
                })
                .collect();
            to_csv(
                &["period", "point_re", "point_im", "multiplier_re", "multiplier_im", "abs", "repelling"],
                &rows,
            )
        },
        0,
    )
}

fn run_order(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let spec: PathSpec = parse(text)?;
    let path: ParamPath = spec.into();
    let label = transport_marking(&path, cfg.grid.max(1))?;
    render(
        cfg,
        label,
        |l| {
            let rows: Vec<Vec<Cell>> = l
                .cyclic_order
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    vec![
                        i.into(),
                        z[0].into(),
                        z[1].into(),
                        l.endpoint_arguments.get(i).copied().unwrap_or(f64::NAN).into(),
                        l.permutation.get(i).copied().map(Cell::from).unwrap_or_else(|| "".into()),
                    ]
                })
                .collect();
            to_csv(&["position", "point_re", "point_im", "endpoint_argument", "sorted_index"], &rows)
        },
        0,
    )
}

#[derive(Serialize)]
struct ConjugatePair {
    period: usize,
    multiplier: [f64; 2],
    image_multiplier: [f64; 2],
    diff: f64,
}

fn run_involution(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let input: QbPoint = parse(text)?;
    let point = QbPoint::new(input.a, input.b)?;
    let image = involution(&point);
    let c1 = CycleCatalog::build(&qb(&point)?, cfg.period_max, None)?;
    let c2 = CycleCatalog::build(&qb(&image)?, cfg.period_max, None)?;
    let mut used = vec![false; c2.cycles.len()];
    let mut pairs = Vec::with_capacity(c1.cycles.len());
    let mut unmatched = 0usize;
    for cy in &c1.cycles {
        let best = c2
            .cycles
            .iter()
            .enumerate()
            .filter(|(j, d)| !used[*j] && d.period == cy.period)
            .map(|(j, d)| (j, (d.multiplier - cy.multiplier.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, diff)) => {
                used[j] = true;
                let m = c2.cycles[j].multiplier;
                pairs.push(ConjugatePair {
                    period: cy.period,
                    multiplier: [cy.multiplier.re, cy.multiplier.im],
                    image_multiplier: [m.re, m.im],
                    diff,
                });
            }
            None => unmatched += 1,
        }
    }
    unmatched += used.iter().filter(|u| !**u).count();
    let max_diff = pairs.iter().fold(0.0f64, |m, p| m.max(p.diff));
    let code = if unmatched > 0 || max_diff > cfg.tol {
        exit::FAILURE
    } else {
        0
    };

    #[derive(Serialize)]
    struct Body {
        point: QbPoint,
        image: QbPoint,
        max_diff: f64,
        unmatched: usize,
        pairs: Vec<ConjugatePair>,
    }
    render(
        cfg,
        Body {
            point,
            image,
            max_diff,
            unmatched,
            pairs,
        },
        |b| {
            let rows: Vec<Vec<Cell>> = b
                .pairs
                .iter()
                .map(|p| {
                    vec![
                        p.period.into(),
                        p.multiplier[0].into(),
                        p.multiplier[1].into(),
                        p.image_multiplier[0].into(),
                        p.image_multiplier[1].into(),
                        p.diff.into(),
                    ]
                })
                .collect();
            to_csv(
                &["period", "multiplier_re", "multiplier_im", "image_re", "image_im", "diff"],
                &rows,
            )
        },
        code,
    )
}
