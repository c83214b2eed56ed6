use crate::output::{json_pretty, num, write_atomic, Csv};
use crate::{Common, RunManifest, EXIT_CONTINUATION, EXIT_NEAR_DEGENERATE, EXIT_OK, EXIT_VALIDATION};
use anyhow::{bail, Context, Result};
use loewner_core::flow::{self, FlowEvaluator, TailOptions, TimeGrid, Trajectory, DEFAULT_T_MAX};
use loewner_core::geometry::{self, ApproachOptions, ApproachReport, SectorReport, Verdict};
use loewner_core::koenigs::{KoenigsMap, DEFAULT_Z0};
use loewner_core::numerics::log_time;
use loewner_core::ode::OdeOptions;
use loewner_core::roots::{classify, Case, CaseKind, Classification, ClassifyOptions, DEFAULT_TOL};
use loewner_core::{AuxiliaryFunction, Error as CoreError, SlitFamily};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub struct Setup {
    pub family: SlitFamily,
    pub aux: AuxiliaryFunction,
    pub classification: Classification,
}

pub fn setup(c: &Common) -> Result<Setup> {
    let family = SlitFamily::load(&c.config).with_context(|| format!("loading {}", c.config.display()))?;
    let n = c.n_trunc.unwrap_or_else(|| family.default_truncation());
    let aux = AuxiliaryFunction::new(&family, n);
    let opts = ClassifyOptions { tol: c.tol.unwrap_or(DEFAULT_TOL), ..ClassifyOptions::default() };
    if !(opts.tol > 0.0 && opts.tol < opts.ambiguous) {
        bail!("--tol must lie in (0, {})", opts.ambiguous);
    }
    let classification = classify(&aux, opts).context("classifying the zeros of P")?;
    Ok(Setup { family, aux, classification })
}

pub fn dispatch(command: &str, c: &Common) -> Result<i32> {
    if let Some(out) = &c.out {
        let manifest = RunManifest { command: command.to_string(), options: c.clone() };
        write_atomic(&out.join("manifest.json"), &json_pretty(&manifest))?;
    }
    match command {
        "classify" => cmd_classify(c),
        "trace" => cmd_trace(c),
        "validate" => cmd_validate(c),
        "export-image" => cmd_export_image(c),
        other => bail!("unknown command {other}"),
    }
}

pub fn run_manifest(path: &Path) -> Result<i32> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if m.options.config.is_relative() && !m.options.config.exists() {
        if let Some(dir) = path.parent() {
            m.options.config = dir.join(&m.options.config);
        }
    }
    dispatch(&m.command, &m.options)
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn case_name(k: CaseKind) -> &'static str {
    match k {
        CaseKind::ComplexPair => "ComplexPair",
        CaseKind::DistinctReal => "DistinctReal",
        CaseKind::DoubleRoot => "DoubleRoot",
        CaseKind::TripleRoot => "TripleRoot",
    }
}

pub fn classification_report(s: &Setup) -> Value {
    let cls = &s.classification;
    let pf = loewner_core::roots::partial_fraction(&s.aux, cls);
    let check = pf.verify_residue_identity();
    let mut v = json!({
        "case": case_name(cls.kind()),
        "resolved": cls.is_resolved(),
        "poles": s.aux.poles().len(),
        "truncation": s.aux.truncation(),
        "standard_roots": cls.standard_roots.iter().map(|r| json!({"x": r.value, "derivative": r.derivative, "interval": r.interval})).collect::<Vec<_>>(),
        "margin": cls.margin,
        "tail_bound": cls.tail_bound,
        "residue": {"sum": check.sum, "residual": check.residual, "bound": check.bound},
        "ambiguity": cls.ambiguity.map(|a| json!({"candidates": [case_name(a.candidates[0]), case_name(a.candidates[1])], "margin": a.margin})),
    });
    let obj = v.as_object_mut().expect("object");
    match cls.case {
        Case::ComplexPair { beta } => {
            obj.insert("beta".into(), pair(beta));
            obj.insert("psi".into(), json!(pf.psi()));
            obj.insert("derivative".into(), pair(s.aux.derivative(beta, 1)));
        }
        Case::DistinctReal { rho1, rho2 } => {
            obj.insert("rho1".into(), json!({"x": rho1.value, "derivative": rho1.derivative}));
            obj.insert("rho2".into(), json!({"x": rho2.value, "derivative": rho2.derivative}));
        }
        Case::DoubleRoot { rho0 } | Case::TripleRoot { rho0 } => {
            obj.insert("rho0".into(), json!({"x": rho0.value, "interval": rho0.interval}));
        }
    }
    v
}

fn classification_text(s: &Setup, v: &Value) -> String {
    let cls = &s.classification;
    let head = match cls.case {
        Case::ComplexPair { beta } => format!(
            "ComplexPair beta={}{:+}i psi={}",
            beta.re,
            beta.im,
            v["psi"].as_f64().unwrap_or(0.0)
        ),
        Case::DistinctReal { rho1, rho2 } => format!("DistinctReal rho1={} rho2={}", rho1.value, rho2.value),
        Case::DoubleRoot { rho0 } => format!("DoubleRoot rho0={}", rho0.value),
        Case::TripleRoot { rho0 } => format!("TripleRoot rho0={}", rho0.value),
    };
    let mut out = head;
    out.push_str(&format!(
        "\nstandard roots: {}\nmargin: {:.3e}\ntail bound: {:.3e}\nresidue sum: {} residual {:.1e} (bound {:.1e})\n",
        cls.standard_roots.len(),
        cls.margin,
        cls.tail_bound,
        v["residue"]["sum"],
        v["residue"]["residual"].as_f64().unwrap_or(f64::NAN),
        v["residue"]["bound"].as_f64().unwrap_or(f64::NAN),
    ));
    if let Some(a) = cls.ambiguity {
        out.push_str(&format!(
            "near-degenerate: {} or {} (margin {:.3e})\n",
            case_name(a.candidates[0]),
            case_name(a.candidates[1]),
            a.margin
        ));
    }
    out
}

pub fn cmd_classify(c: &Common) -> Result<i32> {
    let s = setup(c)?;
    let v = classification_report(&s);
    if c.json {
        print!("{}", json_pretty(&v));
    } else {
        print!("{}", classification_text(&s, &v));
    }
    if let Some(out) = &c.out {
        write_atomic(&out.join("classification.json"), &json_pretty(&v))?;
    }
    Ok(if s.classification.is_resolved() { EXIT_OK } else { EXIT_NEAR_DEGENERATE })
}

fn resolved_map(s: &Setup) -> Result<Option<KoenigsMap>> {
    if !s.classification.is_resolved() {
        let a = s.classification.ambiguity.expect("unresolved has ambiguity");
        eprintln!(
            "classification is near-degenerate ({} vs {}, margin {:.3e}); refusing to continue",
            case_name(a.candidates[0]),
            case_name(a.candidates[1]),
            a.margin
        );
        return Ok(None);
    }
    Ok(Some(KoenigsMap::new(&s.aux, &s.classification, DEFAULT_Z0)?))
}

fn slit_indices(c: &Common, count: usize) -> Result<Vec<usize>> {
    if c.slits.is_empty() {
        return Ok((0..count).collect());
    }
    c.slits
        .iter()
        .map(|&i| {
            if i == 0 || i > count {
                bail!("slit index {i} out of range 1..={count}");
            }
            Ok(i - 1)
        })
        .collect()
}

fn time_grid(c: &Common) -> Result<TimeGrid> {
    let t_max = c.t_max.unwrap_or(DEFAULT_T_MAX);
    if !(t_max > 0.0 && t_max < 1.0) {
        bail!("--t-max must lie in (0, 1)");
    }
    Ok(match c.grid_points {
        Some(n) if n > 0 => {
            let end = log_time(t_max);
            TimeGrid::LogTimes((1..=n).map(|i| end * i as f64 / n as f64).collect())
        }
        _ => TimeGrid::Geometric { t_max },
    })
}

fn tail_options(c: &Common) -> TailOptions {
    let mut t = TailOptions::default();
    if let Some(cap) = c.tau_max {
        t.tau_cap = cap;
    }
    t
}

/// Argument of `h(k_n)` in the half-plane gauge of the distinct-real case.
fn gauged_tip_arg(map: &KoenigsMap, n: usize) -> Option<f64> {
    let rot = map.half_plane_rotation()?;
    let a = map.tip_points()[n].arg() + rot;
    Some(a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor())
}

#[derive(Serialize)]
struct Sidecar {
    slit: usize,
    k: f64,
    case: &'static str,
    limit: [f64; 2],
    complete: bool,
    failure: Option<String>,
    grid_end_t: f64,
    grid_end_dist: f64,
    traced_tau: f64,
    traced_dist: f64,
    approach: Option<ApproachReport>,
    approach_error: Option<String>,
    expected_verdicts: Vec<Verdict>,
    verdict_agrees: Option<bool>,
    /// `pi - arg h(k_n)` in the distinct-real case.
    predicted_angle: Option<f64>,
}

pub struct TraceResult {
    pub trajectory: Trajectory,
    pub grid_end_tau: f64,
    pub approach: std::result::Result<ApproachReport, CoreError>,
}

pub fn trace_slit(ev: &FlowEvaluator, n: usize, grid: &TimeGrid, tail: &TailOptions) -> Result<TraceResult> {
    let grid_end_tau = *grid.log_times()?.last().unwrap_or(&0.0);
    let trajectory = ev.trace_to_limit(n, grid, tail)?;
    let approach = geometry::approach_angle(&trajectory, ev.limit(), &ApproachOptions::default());
    Ok(TraceResult { trajectory, grid_end_tau, approach })
}

pub fn cmd_trace(c: &Common) -> Result<i32> {
    let s = setup(c)?;
    let Some(map) = resolved_map(&s)? else { return Ok(EXIT_NEAR_DEGENERATE) };
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let idx = slit_indices(c, s.aux.slits().len())?;
    let grid = time_grid(c)?;
    let tail = tail_options(c);
    let ev = FlowEvaluator::new(map.clone());
    let results: Vec<Result<TraceResult>> = idx.par_iter().map(|&n| trace_slit(&ev, n, &grid, &tail)).collect();
    let mut code = EXIT_OK;
    for (&n, r) in idx.iter().zip(results) {
        let r = r?;
        let tr = &r.trajectory;
        let mut csv = Csv::new(&["t", "re", "im", "dist_to_limit"]);
        let cut = r.grid_end_tau * (1.0 + 1e-12);
        let mut grid_end = tr.samples[0];
        for smp in tr.samples.iter().filter(|s| s.tau <= cut) {
            csv.row(&[num(smp.t), num(smp.z.re), num(smp.z.im), num(smp.dist)]);
            grid_end = *smp;
        }
        write_atomic(&out.join(format!("slit_{}.csv", n + 1)), &csv.finish())?;
        let expected = Verdict::expected(map.case()).to_vec();
        let predicted_angle = gauged_tip_arg(&map, n).map(|a| PI - a);
        let (approach, approach_error) = match &r.approach {
            Ok(a) => (Some(*a), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let sidecar = Sidecar {
            slit: n + 1,
            k: tr.k,
            case: case_name(map.case()),
            limit: [tr.limit.re, tr.limit.im],
            complete: tr.is_complete(),
            failure: tr.failure.clone(),
            grid_end_t: grid_end.t,
            grid_end_dist: grid_end.dist,
            traced_tau: tr.last().tau,
            traced_dist: tr.last().dist,
            verdict_agrees: approach.map(|a| expected.contains(&a.verdict)),
            approach,
            approach_error,
            expected_verdicts: expected,
            predicted_angle,
        };
        write_atomic(&out.join(format!("slit_{}.geometry.json", n + 1)), &json_pretty(&sidecar))?;
        match (&tr.failure, &sidecar.approach) {
            (Some(f), _) => {
                eprintln!("slit {}: continuation failed: {f}", n + 1);
                code = EXIT_CONTINUATION;
            }
            (None, Some(a)) => println!(
                "slit {}: k={} dist(t_max)={:.3e} verdict={:?} angle={:.6} winding={:.3}",
                n + 1,
                tr.k, grid_end.dist, a.verdict, a.angle, a.winding
            ),
            (None, None) => println!(
                "slit {}: k={} dist(t_max)={:.3e} approach: {}",
                n + 1,
                tr.k,
                grid_end.dist,
                sidecar.approach_error.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(code)
}

pub fn cmd_export_image(c: &Common) -> Result<i32> {
    let s = setup(c)?;
    let Some(map) = resolved_map(&s)? else { return Ok(EXIT_NEAR_DEGENERATE) };
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let points = c.grid_points.unwrap_or(geometry::DEFAULT_SCAN_POINTS);
    let scan = geometry::image_boundary_scan(&map, &geometry::scan_grid(&map, points));
    let mut csv = Csv::new(&["x", "re_h", "im_h", "branch_flags"]);
    for smp in &scan.samples {
        csv.row(&[num(smp.x), num(smp.h.re), num(smp.h.im), smp.flags.to_string()]);
    }
    write_atomic(&out.join("image.csv"), &csv.finish())?;
    let tips: Vec<Value> = map
        .tip_points()
        .iter()
        .enumerate()
        .map(|(n, h)| json!({"slit": n + 1, "k": s.aux.poles()[n], "h": pair(*h), "arg": h.arg(), "gauged_arg": gauged_tip_arg(&map, n)}))
        .collect();
    let doc = json!({"case": case_name(map.case()), "report": scan.report, "tips": tips, "points": scan.samples.len()});
    write_atomic(&out.join("image.json"), &json_pretty(&doc))?;
    println!("{} boundary samples; {}", scan.samples.len(), describe_sector(&scan.report));
    Ok(EXIT_OK)
}

fn describe_sector(r: &SectorReport) -> String {
    match *r {
        SectorReport::Spiral { psi, amplitude, amplitude_scan } => {
            format!("spiral sector psi={psi:.6} amplitude={amplitude:.12} scanned={amplitude_scan:.12}")
        }
        SectorReport::Sector { amplitude, amplitude_scan, .. } => {
            format!("slit-free sector amplitude={amplitude:.12} scanned={amplitude_scan:.12}")
        }
        SectorReport::Strip { width_scan, tip_bound, .. } => format!("strip width={width_scan:.12} tip bound={tip_bound:.6}"),
    }
}

#[derive(Serialize, Clone)]
pub struct CheckRow {
    pub name: String,
    /// `None` when the check does not apply or could not be decided.
    pub pass: Option<bool>,
    pub worst: f64,
    pub tolerance: f64,
    pub note: String,
}

fn row(name: &str, worst: f64, tolerance: f64, note: impl Into<String>) -> CheckRow {
    CheckRow { name: name.into(), pass: Some(worst <= tolerance), worst, tolerance, note: note.into() }
}

fn skipped(name: &str, note: impl Into<String>) -> CheckRow {
    CheckRow { name: name.into(), pass: None, worst: f64::NAN, tolerance: f64::NAN, note: note.into() }
}

fn failed(name: &str, note: impl Into<String>) -> CheckRow {
    CheckRow { name: name.into(), pass: Some(false), worst: f64::NAN, tolerance: f64::NAN, note: note.into() }
}

/// Slits traced by validation: all of them for small families, otherwise
/// the two ends and three in the middle.
fn validation_slits(count: usize) -> Vec<usize> {
    if count <= 6 {
        return (0..count).collect();
    }
    let mid = count / 2;
    let mut v = vec![0, mid.saturating_sub(1), mid, mid + 1, count - 1];
    v.dedup();
    v
}

pub fn validation_rows(s: &Setup, c: &Common) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let map = KoenigsMap::new(&s.aux, &s.classification, DEFAULT_Z0)?;
    let seed = c.seed;

    let pts = geometry::random_points(&map, 40, seed);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for p in pts.chunks_exact(2) {
        let (z, w) = (p[0], p[1]);
        let l = Complex64::new(w.re, 0.0);
        let near = |x: Complex64| s.aux.nearest_pole(x).1 < 1e-3;
        if near(z) || near(l) || (z - w).norm() < 1e-3 || (z - l).norm() < 1e-3 {
            continue;
        }
        checked += 1;
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + a.norm());
        worst = worst.max(rel(s.aux.f_direct(z, w)?, s.aux.f_decomposed(z, w)?));
        worst = worst.max(rel(s.aux.h_direct(z, l, w)?, s.aux.h_decomposed(z, l, w)?));
        worst = worst.max(rel(s.aux.g_direct(z, l)?, s.aux.g_decomposed(z, l)?));
    }
    rows.push(row("decompositions F/H/G", worst, 1e-10, format!("{checked} points")));

    let mut pf = map.partial_fraction().clone();
    if c.inject_fault.as_deref() == Some("residue") {
        if let Some(t) = pf.simple.first_mut() {
            t.coefficient *= 1.01;
        } else {
            pf.singular = match pf.singular {
                loewner_core::roots::SingularPart::DoubleRoot { point, rho0, second, first } => {
                    loewner_core::roots::SingularPart::DoubleRoot { point, rho0, second, first: first * 1.01 }
                }
                other => other,
            };
        }
    }
    let check = pf.verify_residue_identity();
    let residue_tol = check.bound.max(1e-10);
    rows.push(row("residue identity", check.residual, residue_tol, format!("sum {}", check.sum)));

    let u = geometry::univalence_check(&map, 1000, seed ^ 1);
    rows.push(CheckRow {
        name: "univalence sampling".into(),
        pass: Some(u.collisions == 0),
        worst: u.min_separation,
        tolerance: 0.0,
        note: format!("{} pairs, {} collisions", u.pairs, u.collisions),
    });

    let (x0, x1, y0, y1) = geometry::sample_box(&map);
    let z0s = [0.2, 0.45, 0.6, 0.8, 0.35]
        .iter()
        .zip([0.3, 0.9, 0.15, 0.5, 0.7])
        .map(|(fx, fy)| Complex64::new(x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)));
    let zs = geometry::random_points(&map, 10, seed ^ 2);
    let mut worst = 0.0f64;
    let mut worst_flow = 0.0f64;
    let base_ev = FlowEvaluator::new(map.clone());
    let flow_pts = [(zs[0], 0.3), (zs[1], 0.7)];
    let base_flow: Vec<Complex64> = flow_pts.iter().map(|&(z, t)| base_ev.eval_f(z, t)).collect::<std::result::Result<_, _>>()?;
    for z0 in z0s {
        if s.aux.nearest_pole(z0).1 < 1e-3 {
            continue;
        }
        let other = KoenigsMap::new(&s.aux, &s.classification, z0)?;
        let consts: Vec<Complex64> = zs
            .iter()
            .map(|&z| if map.is_multiplicative() { other.phi(z) - map.phi(z) } else { other.eval_unchecked(z) - map.eval_unchecked(z) })
            .collect();
        for k in &consts {
            let mut d = *k - consts[0];
            if map.is_multiplicative() {
                d.im -= 2.0 * PI * (d.im / (2.0 * PI)).round();
            }
            worst = worst.max(d.norm() / (1.0 + consts[0].norm()));
        }
        let ev = FlowEvaluator::new(other);
        for (&(z, t), f) in flow_pts.iter().zip(&base_flow) {
            worst_flow = worst_flow.max((ev.eval_f(z, t)? - f).norm());
        }
    }
    rows.push(row("base-point invariance of h", worst, 1e-9, "5 base points x 10 samples"));
    rows.push(row("base-point invariance of f", worst_flow, 1e-8, ""));

    let samples = flow::default_samples(&s.aux);
    match flow::validate_flow(&base_ev, &samples, &OdeOptions::default()) {
        Ok(v) => {
            rows.push(row("flow round trip", v.worst_round_trip, 1e-6, format!("{} samples", v.checks.len())));
            rows.push(row("flow vs backward ODE", v.worst_oracle, 1e-6, ""));
            let pde = v.checks.iter().step_by(2).take(10).map(|c| c.pde).fold(0.0, f64::max);
            rows.push(row("PDE residual", pde, 1e-5, "central differences"));
        }
        Err(e) => rows.push(failed("flow round trip", e.to_string())),
    }

    match flow::hydrodynamic_check(&s.aux, 0.9, &[10.0, 100.0, 1000.0], &OdeOptions::default()) {
        Ok(h) => {
            let ratio = h.iter().map(|(_, e, b)| e / b).fold(0.0, f64::max);
            rows.push(row("hydrodynamic decay", ratio, 1.0, "|g_t(iy) - iy| / (4 sum b / y)"));
        }
        Err(e) => rows.push(failed("hydrodynamic decay", e.to_string())),
    }

    if map.case() == CaseKind::ComplexPair {
        let margin = geometry::spirallike_check(&map, &geometry::random_points(&map, 100, seed ^ 3))?;
        rows.push(CheckRow {
            name: "spirallike margin".into(),
            pass: Some(margin > 0.0),
            worst: margin,
            tolerance: 0.0,
            note: "must be positive".into(),
        });
    }

    let report = geometry::sector_report(&map);
    rows.push(row("image sector/strip", report.discrepancy(), 1e-6, describe_sector(&report)));

    let grid = time_grid(c)?;
    let tail = tail_options(c);
    let idx = validation_slits(s.aux.slits().len());
    let traces: Vec<Result<TraceResult>> = idx.par_iter().map(|&n| trace_slit(&base_ev, n, &grid, &tail)).collect();
    let mut verdicts = Vec::new();
    let mut angle_worst = 0.0f64;
    let mut undecided = Vec::new();
    let mut failures = Vec::new();
    for (&n, r) in idx.iter().zip(traces) {
        let r = r?;
        if let Some(f) = &r.trajectory.failure {
            failures.push(format!("slit {}: {f}", n + 1));
            continue;
        }
        match r.approach {
            Ok(a) => {
                verdicts.push(a);
                if let Some(tip) = gauged_tip_arg(&map, n) {
                    angle_worst = angle_worst.max((a.angle + tip - PI).abs());
                }
            }
            Err(CoreError::NonConvergentAngle(m)) if map.case() == CaseKind::ComplexPair => undecided.push(m),
            Err(e) => failures.push(format!("slit {}: {e}", n + 1)),
        }
    }
    let expected = Verdict::expected(map.case());
    let disagree = verdicts.iter().filter(|a| !expected.contains(&a.verdict)).count();
    let tangential_split = map.case() == CaseKind::DoubleRoot
        && verdicts.iter().any(|a| a.angle < 0.5 * PI)
        && verdicts.iter().any(|a| a.angle > 0.5 * PI);
    if !failures.is_empty() || disagree > 0 || tangential_split {
        rows.push(failed(
            "trajectory verdicts",
            format!("{} disagree, split={tangential_split}; {}", disagree, failures.join("; ")),
        ));
    } else if verdicts.is_empty() {
        rows.push(skipped("trajectory verdicts", format!("undecided: {}", undecided.join("; "))));
    } else {
        rows.push(CheckRow {
            name: "trajectory verdicts".into(),
            pass: Some(true),
            worst: 0.0,
            tolerance: 0.0,
            note: format!("{} traced, {} undecided", verdicts.len(), undecided.len()),
        });
    }
    if map.case() == CaseKind::DistinctReal && !verdicts.is_empty() {
        rows.push(row("angle + arg h(k) = pi", angle_worst, 0.02, ""));
    }
    if map.case() == CaseKind::TripleRoot && !verdicts.is_empty() {
        let w = verdicts.iter().map(|a| (a.angle - 0.5 * PI).abs()).fold(0.0, f64::max);
        rows.push(row("orthogonal approach", w, 0.02, ""));
    }
    Ok(rows)
}

fn format_table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let status = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        s.push_str(&format!("{status}  {:<width$}  worst {:>10.3e}  tol {:>9.1e}  {}\n", r.name, r.worst, r.tolerance, r.note));
    }
    s
}

pub fn cmd_validate(c: &Common) -> Result<i32> {
    let s = setup(c)?;
    if !s.classification.is_resolved() {
        resolved_map(&s)?;
        return Ok(EXIT_NEAR_DEGENERATE);
    }
    let rows = validation_rows(&s, c)?;
    let all = rows.iter().all(|r| r.pass != Some(false));
    if c.json {
        print!("{}", json_pretty(&rows));
    } else {
        print!("{}", format_table(&rows));
        println!("{}", if all { "all checks passed" } else { "validation FAILED" });
    }
    if let Some(out) = &c.out {
        write_atomic(&out.join("validation.json"), &json_pretty(&json!({"passed": all, "checks": rows})))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_VALIDATION })
}
