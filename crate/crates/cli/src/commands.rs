use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hkcollapse::calibration::{
    energy_density, gap_sum_of_squares, reconstruct, reconstruction_is_su2, tau, tau_wedge, DMatch, LinearMap34,
};
use hkcollapse::collapse_sweep::{self, fit_linear, fit_power, summarize, to_csv, CollapseModel, SweepSummary};
use hkcollapse::config::RunConfig;
use hkcollapse::forms4::metric_of;
use hkcollapse::gibbons_hawking::{calibration_residual, gh_frame, GhPoint};
use hkcollapse::torus_green::{laplacian_probe, HarmonicField, Point3};
use hkcollapse::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::Quantity;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Config(_) | Error::AtPole { .. } | Error::NotAPole(_)) => 2,
            CliError::Lib(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv { .. } => 2,
        }
    }
}

type CliResult = Result<bool, CliError>;

const INEQ_TOL: f64 = 1e-12;
const GAP_REL_TOL: f64 = 1e-10;
const WEDGE_TOL: f64 = 1e-12;
const CALIBRATED_SAMPLES: usize = 10_000;
const SU2_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;

const LAPLACIAN_TOL: f64 = 1e-3;
const LAPLACIAN_STEP: f64 = 1e-4;
const LAPLACIAN_MIN_DIST: f64 = 0.25;
const GH_RESIDUAL_TOL: f64 = 1e-12;
const POLE_PROBE_TOL: f64 = 1e-2;

const RATIO_TOL: f64 = 1e-6;
const EXPONENT_TOL: f64 = 0.02;
const COEFFICIENT_REL: f64 = 0.02;
const SLOPE_REL: f64 = 0.02;
const SLOPE_ZERO: f64 = 1e-3;

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dump(label: &str, m: &LinearMap34) {
    eprintln!("offending matrix ({label}):");
    for row in &m.a {
        eprintln!("  [{:+.17e}, {:+.17e}, {:+.17e}, {:+.17e}]", row[0], row[1], row[2], row[3]);
    }
}

pub fn check_calibration(samples: usize, seed: u64) -> CliResult {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ineq, mut gap_rel, mut wedge) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut offenders: Vec<(&str, LinearMap34)> = Vec::new();
    for _ in 0..samples {
        let m = LinearMap34::new(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
        let t = tau(&m);
        let e = energy_density(&m);
        let sos = gap_sum_of_squares(&m);
        let rel = ((e - t) - sos).abs() / sos;
        let w = (t - tau_wedge(&m)).abs();
        if t - e > INEQ_TOL && !offenders.iter().any(|o| o.0 == "inequality") {
            offenders.push(("inequality", m));
        }
        if rel > GAP_REL_TOL && !offenders.iter().any(|o| o.0 == "gap identity") {
            offenders.push(("gap identity", m));
        }
        if w > WEDGE_TOL && !offenders.iter().any(|o| o.0 == "wedge oracle") {
            offenders.push(("wedge oracle", m));
        }
        ineq = ineq.max(t - e);
        gap_rel = gap_rel.max(rel);
        wedge = wedge.max(w);
    }

    let n_cal = samples.min(CALIBRATED_SAMPLES);
    let (mut residual, mut su2) = (0.0f64, true);
    let mut matches = BTreeSet::new();
    let mut both = 0usize;
    for _ in 0..n_cal {
        let b = rng.gen_range(-1.0..1.0);
        let v = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let m = LinearMap34::calibrated(b, v);
        let r = reconstruct(&m)?;
        let ok = r.residual <= RESIDUAL_TOL && reconstruction_is_su2(&r, SU2_TOL);
        if !ok && !offenders.iter().any(|o| o.0 == "reconstruction") {
            offenders.push(("reconstruction", m));
        }
        residual = residual.max(r.residual);
        su2 &= reconstruction_is_su2(&r, SU2_TOL);
        match r.d_match {
            DMatch::Both => both += 1,
            other => {
                matches.insert(other.label());
            }
        }
    }
    let consistent = matches.len() == 1 && !matches.contains(DMatch::Neither.label());
    let formula = matches.iter().cloned().collect::<Vec<_>>().join(" / ");

    let checks = [
        ("inequality", ineq <= INEQ_TOL, format!("max τ − tr(A*A) = {ineq:.3e} (tol {INEQ_TOL:e})")),
        ("gap identity", gap_rel <= GAP_REL_TOL, format!("max relative error = {gap_rel:.3e} (tol {GAP_REL_TOL:e})")),
        ("wedge oracle", wedge <= WEDGE_TOL, format!("max |τ − Σ ωᵢ∧A*ηᵢ| = {wedge:.3e} (tol {WEDGE_TOL:e})")),
        (
            "reconstruction",
            residual <= RESIDUAL_TOL && su2,
            format!("{n_cal} calibrated maps, max residual = {residual:.3e}, SU(2) at {SU2_TOL:e}: {su2}"),
        ),
        (
            "D formula",
            consistent,
            format!("fitted D = {formula} in every sample; {both} samples with tr(A*A) = 3 match both candidates"),
        ),
    ];
    println!("check-calibration: {samples} random maps, seed {seed}");
    for (name, pass, detail) in &checks {
        println!("{} {name}: {detail}", status(*pass));
    }
    for (label, m) in &offenders {
        dump(label, m);
    }
    let pass = checks.iter().all(|c| c.1);
    println!("result: {}", status(pass));
    Ok(pass)
}

fn point3(v: &[f64]) -> Result<Point3, CliError> {
    v.try_into().map_err(|_| CliError::Usage(format!("expected 3 coordinates, got {}", v.len())))
}

pub fn green_eval(config: &Path, point: &[f64], pole: Option<&[f64]>) -> CliResult {
    let cfg = RunConfig::from_path(config)?;
    let field = HarmonicField::new(&cfg.poles, cfg.ewald);
    let x = point3(point)?;
    let (idx, dist) = field.nearest_pole(&x);
    let nearest = field.poles()[idx];
    let regular: Vec<Value> = field
        .poles()
        .iter()
        .map(|p| Ok(json!({ "position": p.pos, "charge": p.charge, "regular_value": field.regular_value(&p.pos)? })))
        .collect::<Result<_, Error>>()?;
    let mut out = json!({
        "point": x,
        "h": field.eval(&x)?,
        "grad_h": field.grad(&x)?,
        "nearest_pole": { "index": idx, "position": nearest.pos, "charge": nearest.charge, "distance": dist },
        "poles": regular,
    });
    if let Some(p) = pole {
        let p = point3(p)?;
        let g = field.green();
        out["green"] = json!({ "pole": p, "value": g.green(&x, &p)?, "grad": g.green_grad(&x, &p)? });
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
    Ok(true)
}

/// Draws up to `count` points passing `keep`, giving up after `100 · count` draws.
fn sample_points(rng: &mut ChaCha8Rng, lengths: [f64; 3], count: usize, keep: impl Fn(&Point3) -> bool) -> Vec<Point3> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..100 * count {
        if out.len() == count {
            break;
        }
        let x = [rng.gen::<f64>() * lengths[0], rng.gen::<f64>() * lengths[1], rng.gen::<f64>() * lengths[2]];
        if keep(&x) {
            out.push(x);
        }
    }
    out
}

pub fn verify_gh(config: &Path, samples: usize, seed: Option<u64>) -> CliResult {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let cfg = RunConfig::from_path(config)?;
    let seed = seed.unwrap_or(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = HarmonicField::new(&cfg.poles, cfg.ewald);
    let spec = cfg.spec;
    let lengths = spec.lengths();
    let charged: Vec<_> = field.poles().iter().filter(|p| p.charge != 0.0).cloned().collect();

    println!(
        "verify-gh: box {lengths:?}, {} pole pairs, {} charged poles, c0 = {}, δ₀ = {:.6}, seed {seed}",
        cfg.poles.n(),
        charged.len(),
        cfg.poles.c0(),
        cfg.poles.delta0()
    );
    let mut checks: Vec<(String, bool, String)> = Vec::new();

    if charged.is_empty() {
        let pts = sample_points(&mut rng, lengths, samples, |_| true);
        let dev = pts.iter().map(|x| field.eval(x).map(|h| (h - field.c0()).abs())).try_fold(0.0f64, |m, d| {
            d.map(|d| m.max(d))
        })?;
        println!("all charges vanish: h ≡ c0 = {}", field.c0());
        checks.push(("constant".into(), dev <= 1e-12, format!("max |h − c0| = {dev:.3e} over {} points", pts.len())));
    }

    let min_dist = LAPLACIAN_MIN_DIST.min(cfg.poles.delta0());
    let pts = sample_points(&mut rng, lengths, samples, |x| field.nearest_pole(x).1 >= min_dist);
    let target = 4.0 * PI * cfg.poles.charge_sum() / spec.volume();
    let mut lap: f64 = 0.0;
    let mut even: f64 = 0.0;
    for x in &pts {
        let v = laplacian_probe(|y| field.eval(y).unwrap_or(f64::NAN), x, LAPLACIAN_STEP);
        lap = lap.max((v - target).abs());
        let (a, b) = (field.eval(x)?, field.eval(&spec.negate(x))?);
        even = even.max((a - b).abs() / a.abs().max(1.0));
    }
    checks.push((
        "harmonicity".into(),
        pts.len() == samples && lap <= LAPLACIAN_TOL,
        format!("max |Δh| = {lap:.3e} over {} points at distance ≥ {min_dist} (tol {LAPLACIAN_TOL:e})", pts.len()),
    ));
    checks.push(("evenness".into(), even <= 1e-12, format!("max |h(x) − h(−x)| = {even:.3e} (relative)")));

    for &eps in &cfg.eps {
        let mut worst: f64 = 0.0;
        let mut metric_dev: f64 = 0.0;
        let mut done = 0;
        let mut redrawn = 0;
        while done < samples && redrawn < 100 * samples {
            let x = [rng.gen::<f64>() * lengths[0], rng.gen::<f64>() * lengths[1], rng.gen::<f64>() * lengths[2]];
            let pt = match GhPoint::new(&field, &x, Some(eps)) {
                Ok(pt) => pt,
                Err(Error::NotHyperKahler(_) | Error::AtPole { .. }) => {
                    redrawn += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            worst = worst.max(calibration_residual(&field, &x, eps)?);
            let frame = gh_frame(pt.h_val)?;
            let scale = pt.h_val.max(1.0 / pt.h_val);
            metric_dev = metric_dev.max(metric_of(&frame.triple)?.max_abs_diff(&frame.metric) / scale);
            done += 1;
        }
        checks.push((
            format!("calibration ε={eps:e}"),
            done == samples && worst <= GH_RESIDUAL_TOL && metric_dev <= GH_RESIDUAL_TOL,
            format!(
                "max residual = {worst:.3e}, metric deviation = {metric_dev:.3e} over {done} points ({redrawn} redrawn)"
            ),
        ));
    }

    let dir = [0.48, -0.6, 0.64];
    for pole in &charged {
        let f = |rho: f64| -> Result<f64, Error> {
            let x = [pole.pos[0] + rho * dir[0], pole.pos[1] + rho * dir[1], pole.pos[2] + rho * dir[2]];
            let rho = spec.distance(&x, &pole.pos);
            Ok(field.eval(&x)? - pole.charge / rho)
        };
        let vals = [f(1e-2)?, f(1e-3)?, f(1e-4)?];
        let lambda = field.regular_value(&pole.pos)?;
        let spread = (vals[0] - vals[1]).abs().max((vals[1] - vals[2]).abs());
        let limit = (vals[2] - lambda).abs();
        checks.push((
            format!("pole {:?}", pole.pos),
            spread < POLE_PROBE_TOL && limit < POLE_PROBE_TOL,
            format!(
                "charge {}, h − q/ρ at ρ = 1e-2, 1e-3, 1e-4: {:.6}, {:.6}, {:.6}; regular value {lambda:.6}",
                pole.charge, vals[0], vals[1], vals[2]
            ),
        ));
    }

    for (name, pass, detail) in &checks {
        println!("{} {name}: {detail}", status(*pass));
    }
    let passed = checks.iter().filter(|c| c.1).count();
    let pass = passed == checks.len();
    println!("result: {} ({passed}/{} checks)", status(pass), checks.len());
    Ok(pass)
}

fn summary_checks(summary: &SweepSummary) -> Vec<Value> {
    let mut out = Vec::new();
    let mut push = |name: &str, value: f64, expected: f64, tolerance: f64| {
        out.push(json!({
            "name": name,
            "value": value,
            "expected": expected,
            "tolerance": tolerance,
            "pass": (value - expected).abs() <= tolerance,
        }));
    };
    push("deficit_exponent", summary.deficit_num.exponent, 1.2, EXPONENT_TOL);
    let c = summary.deficit_coefficient_expected;
    push("deficit_coefficient", summary.deficit_num.coefficient, c, COEFFICIENT_REL * c);
    let s = summary.vol_slope_expected;
    let tol = if s == 0.0 { SLOPE_ZERO } else { SLOPE_REL * s.abs() };
    push("vol_ratio_slope", summary.vol_ratio.slope, s, tol);
    out
}

pub fn sweep(config: &Path, output: Option<PathBuf>) -> CliResult {
    let cfg = RunConfig::from_path(config)?;
    let out = output.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let model = CollapseModel::new(&cfg.poles, cfg.ewald, cfg.quadrature)?;
    let rows = collapse_sweep::sweep(&model, &cfg.eps)?;
    std::fs::write(&out, to_csv(&rows)).map_err(|source| CliError::Io { path: out.clone(), source })?;

    let ratio_dev = rows.iter().map(|r| (r.ratio_e_tr_i - 1.0).abs()).fold(0.0, f64::max);
    let mut checks = vec![json!({
        "name": "ratio_E_trI",
        "value": ratio_dev,
        "expected": 0.0,
        "tolerance": RATIO_TOL,
        "pass": ratio_dev <= RATIO_TOL,
    })];
    let summary = match summarize(&cfg.poles, &rows) {
        Ok(s) => {
            checks.extend(summary_checks(&s));
            serde_json::to_value(&s).expect("summary serializes")
        }
        Err(Error::Fit(msg)) => json!({ "fit_skipped": msg }),
        Err(e) => return Err(e.into()),
    };
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let report = json!({
        "csv": out.display().to_string(),
        "rows": rows.len(),
        "eps": cfg.eps,
        "summary": summary,
        "checks": checks,
        "pass": pass,
    });
    let summary_path = out.with_extension("summary.json");
    let text = serde_json::to_string_pretty(&report).expect("json values serialize") + "\n";
    std::fs::write(&summary_path, &text).map_err(|source| CliError::Io { path: summary_path.clone(), source })?;

    println!("sweep: {} rows written to {}", rows.len(), out.display());
    for c in report["checks"].as_array().expect("array") {
        println!(
            "{} {}: {} (expected {} ± {})",
            status(c["pass"] == json!(true)),
            c["name"].as_str().unwrap_or(""),
            c["value"],
            c["expected"],
            c["tolerance"]
        );
    }
    println!("summary written to {}", summary_path.display());
    println!("result: {}", status(pass));
    Ok(pass)
}

fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{}: non-numeric value {field:?}", path.display())))?;
            cols[i].push(v);
        }
    }
    Ok((headers, cols))
}

pub fn fit(
    csv_path: &Path,
    quantity: Option<Quantity>,
    config: Option<&Path>,
    x: &str,
    y: Option<&str>,
    linear: bool,
) -> CliResult {
    let (headers, cols) = read_columns(csv_path)?;
    let column = |name: &str| -> Result<&Vec<f64>, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .map(|i| &cols[i])
            .ok_or_else(|| CliError::Usage(format!("column {name:?} not found in {}", csv_path.display())))
    };
    let xs = column(x)?.clone();
    let (label, ys, linear) = match quantity {
        Some(q @ (Quantity::DeficitNum | Quantity::DeficitClosed)) => {
            let config = config.ok_or_else(|| CliError::Usage("deficit fits need --config".into()))?;
            let v = RunConfig::from_path(config)?.spec.volume();
            let eps = column("eps")?;
            let (name, col) = match q {
                Quantity::DeficitNum => ("3π vol − E_num/ε", column("E_num")?),
                _ => ("3π vol − E_closed/ε", column("E_closed")?),
            };
            (name.to_string(), eps.iter().zip(col).map(|(e, c)| 3.0 * PI * v - c / e).collect::<Vec<_>>(), false)
        }
        Some(Quantity::VolRatio) => {
            let col = column("ratio_vol_trI")?;
            ("vol/tr(I) − 1/3".to_string(), col.iter().map(|r| r - 1.0 / 3.0).collect(), true)
        }
        None => {
            let name = y.ok_or_else(|| CliError::Usage("give --y or --quantity".into()))?;
            (name.to_string(), column(name)?.clone(), linear)
        }
    };
    let out = if linear {
        let f = fit_linear(&xs, &ys)?;
        json!({ "x": x, "y": label, "model": "linear", "slope": f.slope, "intercept": f.intercept, "r2": f.r2 })
    } else {
        let f = fit_power(&xs, &ys)?;
        json!({ "x": x, "y": label, "model": "power", "exponent": f.exponent, "coefficient": f.coefficient, "r2": f.r2 })
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
    Ok(true)
}
