//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use finsler_core::catalog::{self, EntryReport, ENTRIES};
use finsler_core::criteria::{classify as classify_metric, DOUGLAS_THRESHOLD};
use finsler_core::curvature::{curvature_eval, k12_sample_directions, k_curvature, matsumoto_pflat_test, K12_ZERO};
use finsler_core::deform::{bar_alpha, construct_rem61, construct_thm12_ii, kropina_deform, m3_deform, DeformedMetric, HarmonicPair};
use finsler_core::exprlang::{parse_expr, parse_metric_def, MetricDef};
use finsler_core::finsler::{finsler_spray, hamel_residual, projective_factor};
use finsler_core::sampling::{normalize_alpha, valid_directions, Region};
use serde_json::json;

use crate::report::{num, opt_num, pass_fail, write_csv, Report, Row};
use crate::{ConstructKind, DeformKind, Global, Sampling, Source};

/// Hamel residuals below this count as satisfied in the given chart.
const HAMEL_THRESHOLD: f64 = 1e-8;
/// Directions per point in the pflat CSV sweep.
const SWEEP_DIRECTIONS: usize = 6;

impl Source {
    pub fn load(&self) -> anyhow::Result<MetricDef> {
        if let Some(name) = &self.entry {
            let entry = catalog::find(name).ok_or_else(|| anyhow!("no catalog entry `{name}`"))?;
            return Ok((entry.build)()?);
        }
        let path = self.metric.as_ref().expect("clap requires --metric or --entry");
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        parse_metric_def(&text).with_context(|| format!("in {}", path.display()))
    }
}

fn sample_points(sampling: &Sampling, g: &Global) -> anyhow::Result<Vec<[f64; 2]>> {
    if sampling.points == 0 {
        bail!("--points must be positive");
    }
    Ok(Region::default().points(sampling.points, g.seed))
}

pub fn eval(def: &MetricDef, x: [f64; 2], y: [f64; 2]) -> anyhow::Result<Report> {
    let s = finsler_spray(def, x, y)?;
    let p = projective_factor(def, x, y)?;
    let json = json!({
        "x": x,
        "y": y,
        "F": num(s.f),
        "G": [num(s.g[0]), num(s.g[1])],
        "G_alpha": [num(s.g_alpha[0]), num(s.g_alpha[1])],
        "N": s.n,
        "P": num(p.p),
        "hamel_residual": num(p.hamel_residual),
        "spray_misfit": num(p.spray_misfit),
    });
    let mut text = String::new();
    writeln!(text, "x = {x:?}, y = {y:?}")?;
    writeln!(text, "F       = {:.12e}", s.f)?;
    writeln!(text, "G       = [{:.12e}, {:.12e}]", s.g[0], s.g[1])?;
    writeln!(text, "G_alpha = [{:.12e}, {:.12e}]", s.g_alpha[0], s.g_alpha[1])?;
    writeln!(text, "P       = {:.12e} (Hamel residual {:.3e}, |G - Py| / |G| = {:.3e})", p.p, p.hamel_residual, p.spray_misfit)?;
    Ok(Report::new(json, text))
}

pub fn douglas(def: &MetricDef, sampling: &Sampling, g: &Global) -> anyhow::Result<Report> {
    let pts = sample_points(sampling, g)?;
    let tol = g.tol.unwrap_or(DOUGLAS_THRESHOLD);
    let c = classify_metric(def, &pts, g.exec());
    let residuals: Vec<Option<f64>> = c.points.iter().map(|p| p.douglas_residual).collect();
    let used: Vec<f64> = residuals.iter().flatten().copied().collect();
    let worst = used.iter().copied().fold(0.0f64, f64::max);
    let ok = used.len() >= finsler_core::criteria::MIN_POINTS && used.iter().all(|r| *r <= tol);
    let json = json!({
        "douglas": pass_fail(ok),
        "label": c.label,
        "tolerance": tol,
        "max_residual": num(worst),
        "points_used": used.len(),
        "points": c.points.iter().map(|p| json!({
            "x": p.x,
            "residual": opt_num(p.douglas_residual),
            "error": p.error,
        })).collect::<Vec<_>>(),
    });
    let mut text = format!("douglas: {} ({})\n", pass_fail(ok), c.label);
    writeln!(text, "max residual {worst:.3e} over {} of {} points, tolerance {tol:.1e}", used.len(), pts.len())?;
    for p in c.points.iter().filter(|p| p.error.is_some()) {
        writeln!(text, "  x = {:?}: {}", p.x, p.error.as_deref().unwrap_or_default())?;
    }
    Ok(Report::new(json, text))
}

pub fn pflat(def: &MetricDef, sampling: &Sampling, g: &Global) -> anyhow::Result<Report> {
    let pts = sample_points(sampling, g)?;
    let tol = g.tol.unwrap_or(K12_ZERO);
    let rep = matsumoto_pflat_test(def, &pts, g.exec());
    let k12_zero = rep.points.iter().all(|p| p.error.is_none() && p.max_abs_k12.is_some_and(|k| k <= tol));
    let flat = rep.douglas && k12_zero;
    let max_k12 = rep.points.iter().filter_map(|p| p.max_abs_k12).fold(0.0f64, f64::max);
    let max_douglas = rep.points.iter().filter_map(|p| p.douglas_residual).fold(0.0f64, f64::max);

    let mut hamel = 0.0f64;
    let mut rows = Vec::new();
    for x in &pts {
        let Ok(dirs) = valid_directions(def, *x) else { continue };
        for y in dirs {
            let y = normalize_alpha(def, *x, y)?;
            let h = hamel_residual(def, *x, y)?;
            hamel = hamel.max(h[0].abs().max(h[1].abs()));
        }
        if g.csv.is_some() {
            for y in k12_sample_directions(def, *x, SWEEP_DIRECTIONS)? {
                let value = k_curvature(def, *x, y)?;
                rows.push(Row { x1: x[0], x2: x[1], y1: y[0], y2: y[1], value });
            }
        }
    }
    if let Some(path) = &g.csv {
        write_csv(path, &rows)?;
    }
    let verdict = if flat { "projectively_flat" } else { "not_projectively_flat" };
    let json = json!({
        "douglas": pass_fail(rep.douglas),
        "K12_zero": pass_fail(k12_zero),
        "hamel_in_chart": pass_fail(hamel <= HAMEL_THRESHOLD),
        "verdict": verdict,
        "tolerance": tol,
        "max_douglas_residual": num(max_douglas),
        "max_abs_K12": num(max_k12),
        "max_hamel_residual": num(hamel),
        "points": rep.points,
    });
    let mut text = String::new();
    writeln!(text, "douglas: {} (max residual {max_douglas:.3e})", pass_fail(rep.douglas))?;
    writeln!(text, "K12_zero: {} (max |K12| {max_k12:.3e}, tolerance {tol:.1e})", pass_fail(k12_zero))?;
    writeln!(text, "hamel_in_chart: {} (max residual {hamel:.3e})", pass_fail(hamel <= HAMEL_THRESHOLD))?;
    writeln!(text, "verdict: {verdict}")?;
    for p in rep.points.iter().filter(|p| p.error.is_some()) {
        writeln!(text, "  x = {:?}: {}", p.x, p.error.as_deref().unwrap_or_default())?;
    }
    Ok(Report::new(json, text))
}

pub fn curvature(def: &MetricDef, x: [f64; 2], y: [f64; 2], grid: usize, g: &Global) -> anyhow::Result<Report> {
    let c = curvature_eval(def, x, y)?;
    if let Some(path) = &g.csv {
        if grid < 2 {
            bail!("--grid must be at least 2");
        }
        let mut rows = Vec::new();
        for p in Region::default().grid(grid) {
            let value = k_curvature(def, p, y).unwrap_or(f64::NAN);
            rows.push(Row { x1: p[0], x2: p[1], y1: y[0], y2: y[1], value });
        }
        write_csv(path, &rows)?;
    }
    let json = serde_json::to_value(&c)?;
    let mut text = String::new();
    writeln!(text, "x = {x:?}, y = {y:?}")?;
    writeln!(text, "F   = {:.12e}", c.f)?;
    writeln!(text, "K   = {:.12e}", c.k)?;
    writeln!(text, "K12 = {:.12e}", c.k12)?;
    writeln!(text, "R   = {:?}", c.r)?;
    writeln!(text, "H1  = {:?}", c.h1)?;
    writeln!(text, "H2  = {:?}", c.h2)?;
    Ok(Report::new(json, text))
}

pub fn classify(def: &MetricDef, sampling: &Sampling, g: &Global) -> anyhow::Result<Report> {
    let pts = sample_points(sampling, g)?;
    let c = classify_metric(def, &pts, g.exec());
    let mut text = format!("{}\n", c.label);
    let cases: Vec<&str> = c.passing_cases.iter().map(|k| k.label()).collect();
    writeln!(text, "douglas: {}; {} usable points", pass_fail(c.douglas), c.points_used)?;
    if !cases.is_empty() {
        writeln!(text, "passing cases: {}", cases.join(", "))?;
    }
    Ok(Report::new(serde_json::to_value(&c)?, text))
}

pub struct DeformParams {
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub k: Option<f64>,
}

fn require(v: Option<f64>, flag: &str, kind: &str) -> anyhow::Result<f64> {
    v.ok_or_else(|| anyhow!("`{kind}` needs --{flag}"))
}

fn emit(d: DeformedMetric, out: Option<PathBuf>, g: &Global) -> anyhow::Result<Report> {
    let toml = d.def.to_toml();
    let mut text = toml.clone();
    if let Some(path) = &out {
        std::fs::write(path, &toml).with_context(|| format!("writing {}", path.display()))?;
        text = format!("wrote {} ({})\n", path.display(), d.kind);
    }
    if let Some(flag) = d.closed_beta_condition {
        if out.is_some() || g.json {
            writeln!(text, "closed beta condition: {}", pass_fail(flag))?;
        }
    }
    Ok(Report::new(serde_json::to_value(&d)?, text))
}

pub fn deform(kind: DeformKind, def: &MetricDef, p: DeformParams, out: Option<PathBuf>, g: &Global) -> anyhow::Result<Report> {
    let pts = Region::default().grid(3);
    let d = match kind {
        DeformKind::Kropina => kropina_deform(def, require(p.m, "m", "kropina")?, &pts)?,
        DeformKind::M3 => m3_deform(def, require(p.c, "c", "m3")?, &pts)?,
        DeformKind::BarAlpha => bar_alpha(def, require(p.k, "k", "bar-alpha")?, &pts)?,
    };
    emit(d, out, g)
}

pub struct ConstructParams {
    pub u: String,
    pub v: String,
    pub bb: Option<String>,
    pub eta: Option<String>,
    pub m: Option<f64>,
    pub c: f64,
}

pub fn construct(kind: ConstructKind, p: ConstructParams, out: Option<PathBuf>, g: &Global) -> anyhow::Result<Report> {
    let expr = |s: &str| parse_expr(s, 2).with_context(|| format!("parsing `{s}`"));
    let pair = HarmonicPair::new(expr(&p.u)?, expr(&p.v)?);
    let pts = Region::default().grid(3);
    let d = match kind {
        ConstructKind::Thm12Ii => {
            let bb = p.bb.as_deref().ok_or_else(|| anyhow!("`thm12_ii` needs --bb"))?;
            construct_thm12_ii(&expr(bb)?, &pair, p.c, &pts)?
        }
        ConstructKind::Rem61 => {
            let eta = p.eta.as_deref().ok_or_else(|| anyhow!("`rem61` needs --eta"))?;
            let m = require(p.m, "m", "rem61")?;
            construct_rem61(&pair, &expr(eta)?, m, p.c, &pts)?
        }
    };
    emit(d, out, g)
}

pub fn catalog_list() -> Report {
    let json = json!(ENTRIES
        .iter()
        .map(|e| json!({"name": e.name, "reference": e.reference, "description": e.description}))
        .collect::<Vec<_>>());
    let width = ENTRIES.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut text = String::new();
    for e in ENTRIES {
        let _ = writeln!(text, "{:width$}  {}  ({})", e.name, e.description, e.reference);
    }
    Report::new(json, text)
}

fn entry_text(r: &EntryReport, out: &mut String) {
    let _ = writeln!(out, "{} [{}]: {}", r.name, r.reference, if r.ok { "ok" } else { "MISMATCH" });
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  {:<26} {} (expected {}) {}",
            c.name,
            pass_fail(c.observed == catalog::Expect::Pass),
            pass_fail(c.expected == catalog::Expect::Pass),
            c.detail
        );
    }
}

/// The entry's checks as top-level `name: pass|fail` fields, plus the details.
fn entry_json(r: &EntryReport) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("name".into(), json!(r.name));
    obj.insert("reference".into(), json!(r.reference));
    obj.insert("ok".into(), json!(r.ok));
    for c in &r.checks {
        obj.insert(c.name.clone(), json!(pass_fail(c.observed == catalog::Expect::Pass)));
    }
    obj.insert("checks".into(), json!(r.checks));
    serde_json::Value::Object(obj)
}

pub fn catalog_run(name: Option<&str>, g: &Global) -> anyhow::Result<Report> {
    let reports = match name {
        Some(n) => {
            let entry = catalog::find(n).ok_or_else(|| anyhow!("no catalog entry `{n}`"))?;
            vec![catalog::run_entry(entry, g.seed, g.exec())]
        }
        None => catalog::run_all(g.seed, g.exec()),
    };
    let mut text = String::new();
    for r in &reports {
        entry_text(r, &mut text);
    }
    let json = match (name, reports.as_slice()) {
        (Some(_), [r]) => entry_json(r),
        _ => json!(reports.iter().map(entry_json).collect::<Vec<_>>()),
    };
    let mut report = Report::new(json, text);
    report.verdict_failed = reports.iter().any(|r| !r.ok);
    Ok(report)
}

pub fn catalog_show(name: &str) -> anyhow::Result<Report> {
    let entry = catalog::find(name).ok_or_else(|| anyhow!("no catalog entry `{name}`"))?;
    let def = (entry.build)()?;
    let toml = def.to_toml();
    Ok(Report::new(json!({"name": name, "metric": toml}), toml))
}
