//! Named example metrics with the verdicts they are known to produce.

use serde::Serialize;

use crate::criteria::{classify, quadratic_spray_fit, KROPINA_LABEL, NOT_DOUGLAS};
use crate::curvature::{flag_curvature_2d, k12_linear_fit, k_curvature, matsumoto_pflat_test};
use crate::deform::{construct_rem61, construct_thm12_ii, HarmonicPair};
use crate::error::Result;
use crate::exprlang::{parse_expr, Expr, MetricDef};
use crate::finsler::{finsler_function, hamel_residual};
use crate::par::Execution;
use crate::phi::PhiSpec;
use crate::sampling::{normalize_alpha, random_metric, rng, Region};

fn p(s: &str) -> Expr {
    parse_expr(s, 2).expect("catalog expressions parse")
}

/// |x|^(1-m) written with grammar primitives.
fn radial_eta(m: f64) -> Expr {
    p("x1^2+x2^2").real_pow(0.5 * (1.0 - m))
}

/// Harmonic pair (x1, x2) with eta = |x|^(1-m): alpha = |y| / |x|^(m+1), beta = <x, y> / |x|^(m+1).
pub fn radial_projective(m: f64, c: f64) -> Result<MetricDef> {
    let pts = Region::default().grid(3);
    Ok(construct_rem61(&HarmonicPair::new(p("x1"), p("x2")), &radial_eta(m), m, c, &pts)?.def)
}

/// Harmonic pair (x2, -x1) with eta = |x|^(1-m): beta = (x2 y1 - x1 y2) / |x|^(m+1), not closed.
pub fn rotational_minkowski(m: f64, c: f64) -> Result<MetricDef> {
    let pts = Region::default().grid(3);
    Ok(construct_rem61(&HarmonicPair::new(p("x2"), p("-x1")), &radial_eta(m), m, c, &pts)?.def)
}

/// alpha = eta^(m/(m-1)) |y|, beta = eta(x2) y1 with phi = c s + 1/s.
pub fn kropina_normal_form(eta: &str, c: f64) -> Result<MetricDef> {
    let pts = Region::default().grid(3);
    Ok(construct_rem61(&HarmonicPair::new(p("1"), p("0")), &p(eta), -1.0, c, &pts)?.def)
}

/// u = x2, v = -x1, B = x1 in the m = -3 construction.
pub fn m3_example(c: f64) -> Result<MetricDef> {
    let pts = Region::default().grid(3);
    Ok(construct_thm12_ii(&p("x1"), &HarmonicPair::new(p("x2"), p("-x1")), c, &pts)?.def)
}

/// alpha = eta^(m/(m-1)) |y|, beta = eta(x1) y1 with phi = c s + s^m.
pub fn normal_form_chart(eta: &str, m: f64, c: f64) -> Result<MetricDef> {
    let pts = Region::default().grid(3);
    Ok(construct_rem61(&HarmonicPair::new(p("1"), p("0")), &p(eta), m, c, &pts)?.def)
}

/// Flag curvature of the normal-form chart:
/// K = c (y1)^3 / (2 F^3) {3 c eta_1^2 y1 / (2F) - eta_11}.
pub fn normal_form_flag_curvature(c: f64, eta1: f64, eta11: f64, f: f64, y1: f64) -> f64 {
    c * y1.powi(3) / (2.0 * f.powi(3)) * (3.0 * c * eta1 * eta1 * y1 / (2.0 * f) - eta11)
}

/// The printed K_12 numerators of the m = -3 example with d = x1, e = x2, in
/// print order. With `regrouped` the trailing -1280 e^3 of the first one sits
/// outside the factor d.
pub fn m3_example_printed(x: [f64; 2], regrouped: bool) -> (f64, f64) {
    let (d, e) = (x[0], x[1]);
    let inner = 1296.0 * d.powi(7) * e + e * (3555.0 + 540.0 * e * e) * d.powi(5) + e * (720.0 * e * e + 2820.0) * d.powi(3)
        + e * (224.0 - 960.0 * e * e) * d;
    let tail = -1280.0 * e.powi(3);
    let first = if regrouped { d * inner + tail } else { d * (inner + tail) };
    let second = d
        * (-540.0 * d.powi(8) + (216.0 * e * e - 2115.0) * d.powi(6) + (720.0 * e * e - 3012.0) * d.powi(4)
            + (768.0 * e * e - 1248.0) * d * d
            + 256.0 * e * e);
    (first, second)
}

/// The printed K_12 of the m = -3 example for the given numerator assignment.
pub fn m3_example_k12(x: [f64; 2], y: [f64; 2], a1: f64, a2: f64) -> f64 {
    let d = x[0];
    let r2 = x[0] * x[0] + x[1] * x[1];
    3.0 * (a1 * y[0] + a2 * y[1]) / ((4.0 + 3.0 * d * d).powi(5) * r2 * r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
}

impl Expect {
    fn of(b: bool) -> Expect {
        if b {
            Expect::Pass
        } else {
            Expect::Fail
        }
    }
}

/// One verdict of an entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: Expect,
    pub observed: Expect,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub reference: String,
    pub checks: Vec<CheckResult>,
    pub ok: bool,
}

type Runner = fn(&MetricDef, &[[f64; 2]], Execution, &mut Vec<CheckResult>) -> Result<()>;

pub struct CatalogEntry {
    pub name: &'static str,
    pub reference: &'static str,
    pub description: &'static str,
    pub build: fn() -> Result<MetricDef>,
    run: Runner,
}

fn push(out: &mut Vec<CheckResult>, name: &str, expected: Expect, observed: bool, detail: String) {
    let observed = Expect::of(observed);
    out.push(CheckResult {
        name: name.to_string(),
        expected,
        observed,
        ok: expected == observed,
        detail,
    });
}

fn check_douglas(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, want: Expect, out: &mut Vec<CheckResult>) {
    let c = classify(def, pts, exec);
    let worst = c.points.iter().filter_map(|p| p.douglas_residual).fold(0.0, f64::max);
    push(out, "douglas", want, c.douglas, format!("max residual {worst:.3e}; label {}", c.label));
}

fn check_label(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, want: &str, out: &mut Vec<CheckResult>) {
    let c = classify(def, pts, exec);
    push(out, "classify", Expect::Pass, c.label == want, format!("label `{}`, expected `{want}`", c.label));
}

fn check_pflat(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, want: Expect, out: &mut Vec<CheckResult>) {
    let r = matsumoto_pflat_test(def, pts, exec);
    let worst = r.points.iter().filter_map(|p| p.max_abs_k12).fold(0.0, f64::max);
    push(
        out,
        "projectively_flat",
        want,
        r.projectively_flat,
        format!("douglas {}, max |K12| {worst:.3e}", r.douglas),
    );
}

const DIRS: [[f64; 2]; 3] = [[1.0, 0.3], [0.6, -0.8], [0.2, 1.0]];

fn run_ex81(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_pflat(def, pts, exec, Expect::Pass, out);
    // the given chart is not a projective one
    let mut worst = 0.0f64;
    for x in pts {
        let h = hamel_residual(def, *x, DIRS[0])?;
        worst = worst.max(h[0].hypot(h[1]));
    }
    push(out, "hamel_in_chart", Expect::Fail, worst <= 1e-8, format!("max |Hamel| {worst:.3e}"));
    Ok(())
}

fn run_ex82(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    let mut q = 0.0f64;
    let mut k = 0.0f64;
    for x in pts {
        q = q.max(quadratic_spray_fit(def, *x)?.residual);
        for y in DIRS {
            k = k.max(flag_curvature_2d(def, *x, y)?.abs());
        }
    }
    push(out, "berwald", Expect::Pass, q <= 1e-9, format!("quadratic spray misfit {q:.3e}"));
    push(out, "flag_curvature_zero", Expect::Pass, k <= 1e-8, format!("max |K| {k:.3e}"));
    Ok(())
}

fn run_ex83(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_label(def, pts, exec, KROPINA_LABEL, out);
    check_pflat(def, pts, exec, Expect::Fail, out);
    // K12 = -3/2 c eta''' y1 with c = 1, eta''' = 6
    let mut worst = 0.0f64;
    for x in pts {
        for y in DIRS {
            let k = k_curvature(def, *x, y)?;
            let want = -9.0 * y[0];
            worst = worst.max((k - want).abs() / want.abs());
        }
    }
    push(out, "K12_matches_closed_form", Expect::Pass, worst <= 1e-6, format!("max relative error {worst:.3e}"));
    Ok(())
}

fn run_ex83_flat(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_pflat(def, pts, exec, Expect::Pass, out);
    Ok(())
}

fn run_ex84(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_label(def, pts, exec, "Theorem 1.2(ii)", out);
    check_pflat(def, pts, exec, Expect::Fail, out);
    let mut linear = 0.0f64;
    let mut smallest = f64::INFINITY;
    for x in pts {
        let f = k12_linear_fit(def, *x)?;
        linear = linear.max(f.residual);
        smallest = smallest.min(f.max_abs);
    }
    push(
        out,
        "K12_nonzero_and_linear",
        Expect::Pass,
        linear <= 1e-7 && smallest > 1e-6,
        format!("linear-fit residual {linear:.3e}, min max|K12| {smallest:.3e}"),
    );
    Ok(())
}

fn run_thm14(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_pflat(def, pts, exec, Expect::Pass, out);
    let c = match def.phi {
        PhiSpec::MKropina { c, .. } => c,
        _ => unreachable!("normal-form chart uses the m-Kropina family"),
    };
    let mut worst = 0.0f64;
    let mut hamel = 0.0f64;
    for x in pts {
        // eta = 1 + x1^2
        let (eta1, eta11) = (2.0 * x[0], 2.0);
        for y in DIRS {
            let y = normalize_alpha(def, *x, y)?;
            let f = finsler_function(def, *x, y, 0)?.value();
            let k = flag_curvature_2d(def, *x, y)?;
            let want = normal_form_flag_curvature(c, eta1, eta11, f, y[0]);
            worst = worst.max((k - want).abs() / want.abs().max(1e-12));
            let h = hamel_residual(def, *x, y)?;
            hamel = hamel.max(h[0].hypot(h[1]));
        }
    }
    push(out, "flag_curvature_closed_form", Expect::Pass, worst <= 1e-7, format!("max relative error {worst:.3e}"));
    push(out, "hamel_in_chart", Expect::Pass, hamel <= 1e-8, format!("max |Hamel| {hamel:.3e}"));
    Ok(())
}

fn run_kropina_random(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Pass, out);
    check_label(def, pts, exec, KROPINA_LABEL, out);
    Ok(())
}

fn run_non_douglas(def: &MetricDef, pts: &[[f64; 2]], exec: Execution, out: &mut Vec<CheckResult>) -> Result<()> {
    check_douglas(def, pts, exec, Expect::Fail, out);
    check_label(def, pts, exec, NOT_DOUGLAS, out);
    check_pflat(def, pts, exec, Expect::Fail, out);
    Ok(())
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "ex81",
        reference: "Example 8.1",
        description: "radial harmonic pair, m = -2, c = 0.5: projectively flat, not in a projective chart",
        build: || radial_projective(-2.0, 0.5),
        run: run_ex81,
    },
    CatalogEntry {
        name: "ex82",
        reference: "Example 8.2",
        description: "rotational harmonic pair, m = 2, c = 0: locally Minkowskian, beta not closed",
        build: || rotational_minkowski(2.0, 0.0),
        run: run_ex82,
    },
    CatalogEntry {
        name: "ex83",
        reference: "Example 8.3",
        description: "F = beta + alpha^2 / beta with eta = x2^3 + 2: Douglas, K12 = -9 y1",
        build: || kropina_normal_form("x2^3+2", 1.0),
        run: run_ex83,
    },
    CatalogEntry {
        name: "ex83_flat",
        reference: "Example 8.3",
        description: "F = beta + alpha^2 / beta with quadratic eta: projectively flat",
        build: || kropina_normal_form("x2^2+1", 1.0),
        run: run_ex83_flat,
    },
    CatalogEntry {
        name: "ex84",
        reference: "Example 8.4",
        description: "F = beta + alpha^4 / beta^3 from u = x2, v = -x1, B = x1: Douglas, not projectively flat",
        build: || m3_example(1.0),
        run: run_ex84,
    },
    CatalogEntry {
        name: "thm14",
        reference: "Theorem 1.4",
        description: "normal-form chart with eta = 1 + x1^2, m = -2, c = 0.7: projective chart, closed-form K",
        build: || normal_form_chart("1+x1^2", -2.0, 0.7),
        run: run_thm14,
    },
    CatalogEntry {
        name: "kropina_random",
        reference: "Theorem 1.2(i)",
        description: "F = 0.4 beta + alpha^2 / beta on random smooth alpha, beta: always Douglas",
        build: || Ok(random_metric(&mut rng(7), PhiSpec::KropinaLinear { c: 0.4 })),
        run: run_kropina_random,
    },
    CatalogEntry {
        name: "non_douglas",
        reference: "Theorem 4.1",
        description: "F = beta^2 / alpha on random smooth alpha, beta: negative control",
        build: || Ok(random_metric(&mut rng(8), PhiSpec::MKropina { c: 0.0, m: 2.0 })),
        run: run_non_douglas,
    },
];

pub fn find(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Sample points used by catalog runs.
pub fn catalog_points(seed: u64) -> Vec<[f64; 2]> {
    Region::default().points(6, seed)
}

pub fn run_entry(entry: &CatalogEntry, seed: u64, exec: Execution) -> EntryReport {
    let pts = catalog_points(seed);
    let mut checks = Vec::new();
    let outcome = (entry.build)().and_then(|def| (entry.run)(&def, &pts, exec, &mut checks));
    if let Err(e) = outcome {
        checks.push(CheckResult {
            name: "evaluation".into(),
            expected: Expect::Pass,
            observed: Expect::Fail,
            ok: false,
            detail: e.to_string(),
        });
    }
    EntryReport {
        name: entry.name.to_string(),
        reference: entry.reference.to_string(),
        ok: checks.iter().all(|c| c.ok),
        checks,
    }
}

/// Every entry, in catalog order; entries run concurrently under `exec`.
pub fn run_all(seed: u64, exec: Execution) -> Vec<EntryReport> {
    let entries: Vec<&CatalogEntry> = ENTRIES.iter().collect();
    exec.map(&entries, |e| run_entry(e, seed, Execution::Sequential))
}

/// Douglas metrics realising each condition family, built from the harmonic
/// constructions and re-expressed through alpha^2 = alpha-bar^2 - k beta^2.
pub mod cases {
    use super::*;
    use crate::criteria::RijCase;
    use crate::deform::{bar_alpha, kropina_deform};

    fn grid() -> Vec<[f64; 2]> {
        Region::default().grid(3)
    }

    /// phi = k1 s + 2 k2 / s + 1 / s^3 over the m = -3 construction with linear part c.
    pub fn thm41_ii(c: f64, k2: f64) -> Result<MetricDef> {
        let base = m3_example(c)?;
        let d = bar_alpha(&base, -k2, &grid())?.def;
        d.with_phi(PhiSpec::Thm41Ii { k1: c + k2 * k2, k2 })
    }

    /// phi = k1 s + s^m (1 + k2 s^2)^((1 - m) / 2) over the radial construction (beta closed).
    pub fn thm41_iii(k1: f64, k2: f64, m: f64) -> Result<MetricDef> {
        let base = radial_projective(m, k1)?;
        let d = bar_alpha(&base, -k2, &grid())?.def;
        d.with_phi(PhiSpec::Thm41Iii { k1, k2, m })
    }

    /// phi = s^m (1 + k s^2)^((1 - m) / 2) over the rotational construction (beta not closed).
    pub fn thm41_iv(m: f64, k: f64) -> Result<MetricDef> {
        let base = rotational_minkowski(m, 0.0)?;
        let d = bar_alpha(&base, -k, &grid())?.def;
        d.with_phi(PhiSpec::Thm41Iv { m, k })
    }

    /// Unit-norm beta from the rotational Kropina construction.
    pub fn thm41_v(m: f64, k: f64) -> Result<MetricDef> {
        let base = rotational_minkowski(-1.0, 0.0)?;
        let d = kropina_deform(&base, 1.0, &grid())?.def;
        d.with_phi(PhiSpec::Thm41V { m, k, b: 1.0 })
    }

    /// A representative metric for each case.
    pub fn representative(case: RijCase) -> Result<MetricDef> {
        match case {
            RijCase::Thm41Ii => thm41_ii(0.5, -0.2),
            RijCase::Thm41Iii => thm41_iii(0.5, -0.3, -2.0),
            RijCase::Thm41Iv => thm41_iv(2.0, -0.3),
            RijCase::Thm41IvConstb => {
                let base = rotational_minkowski(-1.0, 0.0)?;
                let d = kropina_deform(&base, 1.0, &grid())?.def;
                d.with_phi(PhiSpec::Thm41IvConstB { m: 2.0, b: 1.0 })
            }
            RijCase::Thm41V => thm41_v(2.0, -0.3),
            RijCase::Cor61Ii => m3_example(1.0),
            RijCase::Cor61Iii => radial_projective(-2.0, 0.5),
            RijCase::Cor61Iv => rotational_minkowski(2.0, 0.0),
        }
    }
}
