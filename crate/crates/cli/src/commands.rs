use grassmann_morse::chain::BoundaryResidual;
use grassmann_morse::flow::{flow_report, FlowConfig};
use grassmann_morse::geometry::*;
use grassmann_morse::snf::{homology_table, theorem4_prediction, HomologyTable, Theorem4Interpretation};
use grassmann_morse::{
    boundary_square_residual, build_complex, enumerate_critical_points, incidence_coefficient, index_census,
    CriticalPoint, Result, SignConvention,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{num, opt, sci, status, Tabular};
use crate::{Format, Report, RunConfig};

fn size(cfg: &RunConfig) -> (usize, usize) {
    cfg.size.expect("validated before dispatch")
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn labels(p: &CriticalPoint) -> String {
    p.subset().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn residual_value(r: &BoundaryResidual) -> i64 {
    i64::try_from(&r.max_abs_entry).unwrap_or(i64::MAX)
}

/// `dim H_r(G; Z_2)` from the integral groups by universal coefficients.
fn mod_two_dims(t: &HomologyTable) -> Vec<usize> {
    let even = |r: usize| t.groups[r].torsion.iter().filter(|d| *d % 2 == 0).count();
    (0..t.groups.len())
        .map(|r| t.groups[r].free_rank + even(r) + if r > 0 { even(r - 1) } else { 0 })
        .collect()
}

pub fn homology(cfg: &RunConfig) -> Result<Report> {
    let (n, m) = size(cfg);
    let complex = build_complex(n, m, cfg.convention)?;
    let residual = boundary_square_residual(&complex);
    if !residual.is_zero() {
        return Ok(Report {
            text: undefined_homology(cfg, &residual),
            failed: true,
        });
    }
    let table = homology_table(&complex)?;
    let mod2 = mod_two_dims(&table);
    let mut degrees = Tabular::new(vec!["r", "c_r", "H_r", "mod2"]);
    let mut csv = Tabular::new(vec!["r", "c_r", "free_rank", "torsion", "mod2_dim"]);
    for (g, d2) in table.groups.iter().zip(&mod2) {
        let c = complex.rank_at(g.r as isize).to_string();
        degrees.push(vec![g.r.to_string(), c.clone(), g.group().to_string(), d2.to_string()]);
        let torsion: Vec<String> = g.torsion.iter().map(ToString::to_string).collect();
        csv.push(vec![
            g.r.to_string(),
            c,
            g.free_rank.to_string(),
            torsion.join(";"),
            d2.to_string(),
        ]);
    }
    let text = match cfg.format {
        Format::Json => to_json(&table),
        Format::Csv => csv.csv(),
        Format::Table => {
            let mut out = format!("G({n},{m}), convention {}\n", cfg.convention);
            out.push_str(&degrees.table());
            out.push_str(&format!(
                "\nEuler characteristic: {} (from c_r: {})\n\n",
                table.betti_euler(),
                table.euler
            ));
            out.push_str(&closed_form_section(&table)?);
            out
        }
    };
    Ok(Report { text, failed: false })
}

fn closed_form_section(table: &HomologyTable) -> Result<String> {
    let mark = |ok: bool| if ok { "=" } else { "x" };
    let mut t = Tabular::new(vec!["r", "computed", "raw-sum", "morse-index"]);
    let (mut raw_ok, mut index_ok) = (0, 0);
    for g in &table.groups {
        let computed = g.group();
        let r = g.r as isize;
        let raw = theorem4_prediction(table.n, table.m, r, Theorem4Interpretation::RawSum)?;
        let idx = theorem4_prediction(table.n, table.m, r, Theorem4Interpretation::MorseIndex)?;
        raw_ok += usize::from(raw == computed);
        index_ok += usize::from(idx == computed);
        t.push(vec![
            g.r.to_string(),
            computed.to_string(),
            format!("{} {raw}", mark(raw == computed)),
            format!("{} {idx}", mark(idx == computed)),
        ]);
    }
    let total = table.groups.len();
    Ok(format!(
        "closed-form comparison\n{}agreements: raw-sum {raw_ok}/{total}, morse-index {index_ok}/{total}\n",
        t.table()
    ))
}

fn undefined_homology(cfg: &RunConfig, r: &BoundaryResidual) -> String {
    let (n, m) = size(cfg);
    let (row, col) = r.witness.clone().expect("nonzero residual has a witness");
    match cfg.format {
        Format::Json => to_json(&json!({
            "n": n,
            "m": m,
            "convention": cfg.convention,
            "residual": residual_value(r),
            "witness": [row, col],
            "groups": Value::Null,
        })),
        Format::Csv => format!(
            "residual,witness_row,witness_col\n{},{},{}\n",
            r.max_abs_entry,
            labels(&row),
            labels(&col)
        ),
        Format::Table => format!(
            "warning: d∘d != 0 under convention {}; homology not defined; residual shown\n\
             G({n},{m}), convention {}\nresidual: {}\nwitness: ({row}, {col})\n",
            cfg.convention, cfg.convention, r.max_abs_entry
        ),
    }
}

pub fn census(cfg: &RunConfig) -> Result<Report> {
    let (n, m) = size(cfg);
    let counts = index_census(n, m)?;
    let mut t = Tabular::new(vec!["r", "c_r"]);
    for (r, c) in counts.iter().enumerate() {
        t.push(vec![r.to_string(), c.to_string()]);
    }
    let total: usize = counts.iter().sum();
    let text = match cfg.format {
        Format::Json => to_json(&json!({ "n": n, "m": m, "census": counts, "total": total })),
        Format::Csv => t.csv(),
        Format::Table => format!("G({n},{m}): {total} critical points\n{}", t.table()),
    };
    Ok(Report { text, failed: false })
}

pub fn verify_boundary(cfg: &RunConfig) -> Result<Report> {
    let grid: Vec<(usize, usize)> = match cfg.size {
        Some(nm) => vec![nm],
        None => (1..=cfg.max_n).flat_map(|n| (1..=n).map(move |m| (n, m))).collect(),
    };
    let mut t = Tabular::new(vec!["n", "m", "residual", "witness_row", "witness_col", "status"]);
    let mut entries = Vec::new();
    let mut bad = 0;
    for &(n, m) in &grid {
        let r = boundary_square_residual(&build_complex(n, m, cfg.convention)?);
        bad += usize::from(!r.is_zero());
        let (row, col) = match &r.witness {
            Some((a, b)) if cfg.format == Format::Csv => (labels(a), labels(b)),
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => ("-".into(), "-".into()),
        };
        t.push(vec![
            n.to_string(),
            m.to_string(),
            r.max_abs_entry.to_string(),
            row,
            col,
            status(r.is_zero()),
        ]);
        entries.push(json!({ "n": n, "m": m, "residual": residual_value(&r), "witness": r.witness }));
    }
    let text = match cfg.format {
        Format::Json => to_json(&json!({
            "convention": cfg.convention,
            "passed": bad == 0,
            "results": entries,
        })),
        Format::Csv => t.csv(),
        Format::Table => format!(
            "d∘d residuals, convention {}\n{}{} of {} complexes satisfy d∘d = 0\n",
            cfg.convention,
            t.table(),
            grid.len() - bad,
            grid.len()
        ),
    };
    Ok(Report { text, failed: bad > 0 })
}

const GRADIENT_TOL: f64 = 1e-10;
const METRIC_TOL: f64 = 1e-10;
const HESSIAN_TOL: f64 = 1e-6;
const PARTIALS_TOL: f64 = 1e-6;
const STRUCTURED_TOL: f64 = 1e-8;
const SAMPLES_PER_CHART: usize = 20;

fn with_coords(p: &ChartPoint, v: &[f64]) -> Result<ChartPoint> {
    ChartPoint::from_vec(p.chart().clone(), v)
}

fn shifted(p: &ChartPoint, deltas: &[(usize, f64)]) -> Result<ChartPoint> {
    let mut v = p.to_vec();
    for &(i, d) in deltas {
        v[i] += d;
    }
    with_coords(p, &v)
}

fn identity_deviation(g: &DMatrix<f64>) -> f64 {
    let mut dev: f64 = 0.0;
    for a in 0..g.nrows() {
        for b in 0..g.ncols() {
            let target = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((g[(a, b)] - target).abs());
        }
    }
    dev
}

struct PointCheck {
    point: CriticalPoint,
    value: f64,
    hessian: Vec<f64>,
    hessian_fd_rel: f64,
    negative: usize,
    gradient_norm: f64,
    metric_dev: f64,
}

impl PointCheck {
    fn ok(&self) -> bool {
        self.hessian_fd_rel < HESSIAN_TOL
            && self.negative == self.point.morse_index()
            && self.gradient_norm < GRADIENT_TOL
            && self.metric_dev < METRIC_TOL
    }
}

fn check_critical_point(p0: &CriticalPoint, s: &Spectrum) -> Result<PointCheck> {
    let h = 1e-4;
    let o = ChartPoint::origin(p0.clone());
    let hessian = hessian_at_critical(p0, s)?;
    let f0 = morse_value(&o, s)?;
    let mut hessian_fd_rel: f64 = 0.0;
    for (a, &hd) in hessian.iter().enumerate() {
        let fp = morse_value(&shifted(&o, &[(a, h)])?, s)?;
        let fm = morse_value(&shifted(&o, &[(a, -h)])?, s)?;
        let fd = (fp - 2.0 * f0 + fm) / (h * h);
        hessian_fd_rel = hessian_fd_rel.max((fd - hd).abs() / hd.abs());
    }
    Ok(PointCheck {
        point: p0.clone(),
        value: f0,
        negative: hessian.iter().filter(|v| **v < 0.0).count(),
        hessian,
        hessian_fd_rel,
        gradient_norm: gradient(&o, s)?.norm(),
        metric_dev: identity_deviation(&metric_matrix(&o)?),
    })
}

#[derive(Default)]
struct SampleCheck {
    points: usize,
    partials_err: f64,
    structured_rel: f64,
    inverse_dev: f64,
}

impl SampleCheck {
    fn ok(&self) -> bool {
        self.partials_err < PARTIALS_TOL && self.structured_rel < STRUCTURED_TOL && self.inverse_dev < METRIC_TOL
    }
}

fn sampled_checks(charts: &[CriticalPoint], s: &Spectrum, seed: u64) -> Result<SampleCheck> {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SampleCheck::default();
    for chart in charts {
        let dim = chart.m() * (chart.n() - chart.m());
        for _ in 0..SAMPLES_PER_CHART {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = ChartPoint::from_vec(chart.clone(), &v)?;
            let f = morse_value(&p, s)?;
            let df = euclidean_partials(&p, s)?;
            let k = df.ncols();
            for i in 0..dim {
                let fd = (morse_value(&shifted(&p, &[(i, h)])?, s)? - morse_value(&shifted(&p, &[(i, -h)])?, s)?)
                    / (2.0 * h);
                let exact = df[(i / k, i % k)];
                out.partials_err = out
                    .partials_err
                    .max((exact - fd).abs() / exact.abs().max(fd.abs()).max(f));
            }
            let generic = gradient(&p, s)?;
            let structured = gradient_structured(&p, s)?;
            let diff = (&generic - &structured).amax();
            out.structured_rel = out.structured_rel.max(diff / generic.amax().max(f64::MIN_POSITIVE));
            out.inverse_dev = out
                .inverse_dev
                .max(identity_deviation(&(metric_matrix(&p)? * metric_inverse(&p))));
            out.points += 1;
        }
    }
    Ok(out)
}

pub fn verify_geometry(cfg: &RunConfig) -> Result<Report> {
    let (n, m) = size(cfg);
    let s = cfg.spectrum_for(n);
    let charts = enumerate_critical_points(n, m)?;
    let points = charts
        .iter()
        .map(|p| check_critical_point(p, &s))
        .collect::<Result<Vec<_>>>()?;
    let samples = sampled_checks(&charts, &s, cfg.seed)?;
    let failed = !samples.ok() || points.iter().any(|p| !p.ok());
    let hessian_list = |p: &PointCheck, sep: &str| p.hessian.iter().map(|v| num(*v)).collect::<Vec<_>>().join(sep);
    let text = match cfg.format {
        Format::Json => {
            let pts: Vec<Value> = points
                .iter()
                .map(|p| {
                    json!({
                        "point": p.point,
                        "index": p.point.morse_index(),
                        "value": p.value,
                        "hessian": p.hessian,
                        "hessian_fd_max_rel": p.hessian_fd_rel,
                        "negative_eigenvalues": p.negative,
                        "gradient_norm": p.gradient_norm,
                        "metric_identity_dev": p.metric_dev,
                        "ok": p.ok(),
                    })
                })
                .collect();
            to_json(&json!({
                "n": n,
                "m": m,
                "lambdas": s.lambdas(),
                "seed": cfg.seed,
                "passed": !failed,
                "critical_points": pts,
                "samples": {
                    "points": samples.points,
                    "partials_max_err": samples.partials_err,
                    "structured_gradient_max_rel": samples.structured_rel,
                    "metric_inverse_max_dev": samples.inverse_dev,
                    "ok": samples.ok(),
                },
            }))
        }
        Format::Csv | Format::Table => {
            let mut t = Tabular::new(vec![
                "point",
                "index",
                "f",
                "hessian",
                "fd_rel",
                "grad",
                "metric_dev",
                "status",
            ]);
            let sep = if cfg.format == Format::Csv { ";" } else { ", " };
            for p in &points {
                let hess = hessian_list(p, sep);
                let (label, hess) = if cfg.format == Format::Csv {
                    (labels(&p.point), hess)
                } else {
                    (p.point.to_string(), format!("({hess})"))
                };
                t.push(vec![
                    label,
                    p.point.morse_index().to_string(),
                    num(p.value),
                    hess,
                    sci(p.hessian_fd_rel),
                    sci(p.gradient_norm),
                    sci(p.metric_dev),
                    status(p.ok()),
                ]);
            }
            if cfg.format == Format::Csv {
                t.csv()
            } else {
                let lambdas: Vec<String> = s.lambdas().iter().map(|v| num(*v)).collect();
                format!(
                    "G({n},{m}), lambdas {}\n{}sampled {} points (seed {}): partials err {}, structured gradient rel {}, G·G^-1 dev {}: {}\n",
                    lambdas.join(","),
                    t.table(),
                    samples.points,
                    cfg.seed,
                    sci(samples.partials_err),
                    sci(samples.structured_rel),
                    sci(samples.inverse_dev),
                    status(samples.ok())
                )
            }
        }
    };
    Ok(Report { text, failed })
}

const CONFINEMENT_TOL: f64 = 1e-8;

pub fn verify_flow(cfg: &RunConfig) -> Result<Report> {
    let (n, m) = size(cfg);
    let s = cfg.spectrum_for(n);
    let rep = flow_report(n, m, &s, &FlowConfig::default())?;
    let conv = cfg.convention;
    let traj_ok = |t: &grassmann_morse::flow::TrajectoryRecord| {
        t.sink.is_some() && t.monotone && t.confinement_max < CONFINEMENT_TOL
    };
    let mut t = Tabular::new(vec![
        "source", "target", "slot", "count", "n+", "n-", "sum", "sum_last", "expected", "status",
    ]);
    let mut pair_json = Vec::new();
    let mut failed = false;
    for p in &rep.pairs {
        let expected = p.slot.map(|k| incidence_coefficient(conv, &p.source, k)).transpose()?;
        let measured = if conv == SignConvention::FlowOriented {
            p.signed_sum_launch_last
        } else {
            p.signed_sum
        };
        let mut ok = p.count == p.predicted_count;
        if let Some(e) = expected {
            ok &= match (conv, measured) {
                (SignConvention::ModTwo, Some(v)) => (v - e).rem_euclid(2) == 0,
                (_, Some(v)) => v == e,
                (_, None) => false,
            };
            if conv == SignConvention::PaperLemma11 {
                ok &= p.sign_plus.zip(p.sign_minus) == p.predicted_signs;
            }
        }
        failed |= !ok;
        let (src, dst) = if cfg.format == Format::Csv {
            (labels(&p.source), labels(&p.target))
        } else {
            (p.source.to_string(), p.target.to_string())
        };
        t.push(vec![
            src,
            dst,
            opt(p.slot),
            p.count.to_string(),
            opt(p.sign_plus),
            opt(p.sign_minus),
            opt(p.signed_sum),
            opt(p.signed_sum_launch_last),
            opt(expected),
            status(ok),
        ]);
        let mut v = serde_json::to_value(p).expect("pair summary serializes");
        v["expected"] = json!(expected);
        v["ok"] = json!(ok);
        pair_json.push(v);
    }
    let bad_traj = rep.trajectories.iter().filter(|t| !traj_ok(t)).count();
    failed |= bad_traj > 0;
    let max_conf = rep.trajectories.iter().map(|t| t.confinement_max).fold(0.0, f64::max);
    let max_changes = rep.trajectories.iter().map(|t| t.transitions).max().unwrap_or(0);
    let text = match cfg.format {
        Format::Json => to_json(&json!({
            "n": n,
            "m": m,
            "lambdas": rep.lambdas,
            "convention": conv,
            "passed": !failed,
            "pairs": pair_json,
            "trajectories": rep.trajectories,
        })),
        Format::Csv => t.csv(),
        Format::Table => format!(
            "gradient flow on G({n},{m}), signs checked against convention {conv}\n{}\
             {} trajectories, {} failing convergence/monotonicity/confinement; max confinement {}; at most {} chart changes\n\
             verify-flow: {}\n",
            t.table(),
            rep.trajectories.len(),
            bad_traj,
            sci(max_conf),
            max_changes,
            if failed { "FAIL" } else { "PASS" }
        ),
    };
    Ok(Report { text, failed })
}
