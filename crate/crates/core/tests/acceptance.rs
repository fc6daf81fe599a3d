//! Acceptance suite: one line per criterion, all required to pass.

mod common;

use std::time::{Duration, Instant};

use finsler_core::catalog::{
    kropina_normal_form, m3_example, normal_form_chart, normal_form_flag_curvature, radial_projective,
    rotational_minkowski,
};
use finsler_core::criteria::{
    douglas_fit_default, prop34_residual, projective_factor_formula, quadratic_spray_fit, default_s_grid,
    rij_condition_check, ProjectiveCase, RijCase, DOUGLAS_THRESHOLD,
};
use finsler_core::curvature::{flag_curvature_2d, k12_sample_directions, k_curvature, matsumoto_pflat_test};
use finsler_core::deform::{bar_alpha, construct_rem61, kropina_deform, m3_checks, m3_deform, HarmonicPair};
use finsler_core::exprlang::{parse_expr, parse_phi_expr, MetricDef};
use finsler_core::finsler::{direct_spray_oracle, finsler_function, hamel_residual, spray_jets};
use finsler_core::geometry::{covariant_data, gauss_curvature, metric_at};
use finsler_core::jets::{eval_jet};
use finsler_core::par::Execution;
use finsler_core::phi::{identity_applies, phi_identity_residual, Identity, PhiSpec};
use finsler_core::sampling::{
    normalize_alpha, random_field_expr, random_metric, rng, strongly_convex, valid_directions, Region,
};
use finsler_core::{Error, Result};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    Region::default().points(n, seed)
}

fn p(s: &str) -> finsler_core::exprlang::Expr {
    parse_expr(s, 2).unwrap()
}

fn catalog_families() -> Vec<PhiSpec> {
    vec![
        PhiSpec::MKropina { c: 0.0, m: -1.0 },
        PhiSpec::MKropina { c: 0.5, m: -2.0 },
        PhiSpec::MKropina { c: 1.0, m: -3.0 },
        PhiSpec::MKropina { c: 0.3, m: 2.0 },
        PhiSpec::KropinaLinear { c: 1.0 },
        PhiSpec::Thm41Ii { k1: 0.3, k2: -0.2 },
        PhiSpec::Thm41Iii { k1: 0.3, k2: -0.2, m: 2.5 },
        PhiSpec::Thm41Iv { m: -2.0, k: 0.3 },
        PhiSpec::Thm41IvConstB { m: 3.0, b: 3.0 },
        PhiSpec::Thm41V { m: 2.0, k: 0.1, b: 3.0 },
        PhiSpec::Custom(parse_phi_expr("1 + s + 0.5*s^2").unwrap()),
    ]
}

fn spray_cross_path() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut families = 0;
    for (i, phi) in catalog_families().into_iter().enumerate() {
        let tag = phi.tag();
        let mut r = rng(100 + i as u64);
        let def = random_metric(&mut r, phi);
        let mut done = 0;
        let mut tries = 0;
        while done < 20 {
            tries += 1;
            if tries > 400 {
                return outcome(false, format!("{tag}: only {done} valid samples"));
            }
            let x = Region::default().sample(&mut r);
            let th = r.gen_range(0.0..std::f64::consts::TAU);
            let y = [th.cos(), th.sin()];
            let m = metric_at(&def, x)?;
            let alpha = (m.a[0][0] * y[0] * y[0] + 2.0 * m.a[0][1] * y[0] * y[1] + m.a[1][1] * y[1] * y[1]).sqrt();
            let s = (m.b[0] * y[0] + m.b[1] * y[1]) / alpha;
            if s.abs() < 0.05 * m.b2.sqrt() || !strongly_convex(&def.phi, s, m.b2) {
                continue;
            }
            let (Ok(sj), Ok(direct)) = (spray_jets(&def, x, y, 0), direct_spray_oracle(&def, x, y)) else {
                continue;
            };
            let g = [sj.g[0].value(), sj.g[1].value()];
            let err = (g[0] - direct[0]).hypot(g[1] - direct[1]) / direct[0].hypot(direct[1]).max(1e-300);
            worst = worst.max(err);
            done += 1;
        }
        families += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(10),
        format!("{families} families x 20 samples, max relative gap {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn kropina_always_douglas() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut fits = 0;
    for c in [0.0, 1.0] {
        for seed in 0..5 {
            let def = random_metric(&mut rng(200 + seed), PhiSpec::KropinaLinear { c });
            for x in points(10, 300 + seed) {
                worst = worst.max(douglas_fit_default(&def, x)?.residual);
                fits += 1;
            }
        }
    }
    outcome(worst <= DOUGLAS_THRESHOLD, format!("{fits} fits, max residual {worst:.2e}"))
}

fn example_kropina_k12() -> Result<Outcome> {
    let cubic = kropina_normal_form("x2^3+2", 1.0)?;
    let mut worst = 0.0f64;
    for (i, x) in points(10, 400).into_iter().enumerate() {
        let th = 0.3 + 0.5 * i as f64;
        let y = [th.cos(), th.sin()];
        if y[0].abs() < 0.1 {
            continue;
        }
        let k = k_curvature(&cubic, x, y)?;
        worst = worst.max((k + 9.0 * y[0]).abs() / (9.0 * y[0]).abs());
    }
    let unit = k_curvature(&cubic, [1.0, 1.0], [1.0, 0.0])?;
    let flat = kropina_normal_form("x2^2+1", 1.0)?;
    let pts = points(10, 401);
    let mut flat_max = 0.0f64;
    for x in &pts {
        for y in k12_sample_directions(&flat, *x, 6)? {
            flat_max = flat_max.max(k_curvature(&flat, *x, y)?.abs());
        }
    }
    let pflat = matsumoto_pflat_test(&flat, &pts, Execution::default()).projectively_flat;
    outcome(
        worst <= 1e-6 && flat_max <= 1e-8 && pflat,
        format!("cubic eta: max rel err {worst:.2e}, K12(y=(1,0)) = {unit:.9}; quadratic eta: max |K12| {flat_max:.2e}, pflat {pflat}"),
    )
}

fn example_m3_not_flat() -> Result<Outcome> {
    let def = m3_example(1.0)?;
    let pts = points(10, 500);
    let mut douglas = 0.0f64;
    let mut rij = 0.0f64;
    let mut smallest = f64::INFINITY;
    for x in &pts {
        douglas = douglas.max(douglas_fit_default(&def, *x)?.residual);
        rij = rij.max(rij_condition_check(RijCase::Cor61Ii, &def, *x)?.residual);
        let k = k12_sample_directions(&def, *x, 6)?
            .into_iter()
            .map(|y| k_curvature(&def, *x, y).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        smallest = smallest.min(k.into_iter().fold(0.0, f64::max));
    }
    let report = matsumoto_pflat_test(&def, &pts, Execution::default());
    outcome(
        douglas <= DOUGLAS_THRESHOLD && rij <= 1e-7 && smallest >= 1e-4 && report.douglas && !report.projectively_flat,
        format!("douglas {douglas:.2e}, m=-3 condition {rij:.2e}, min over points of max |K12| {smallest:.3}, not projectively flat"),
    )
}

fn examples_flat_and_minkowski() -> Result<Outcome> {
    let radial = radial_projective(-2.0, 0.5)?;
    let pflat = matsumoto_pflat_test(&radial, &points(8, 600), Execution::default()).projectively_flat;
    let rot = rotational_minkowski(-2.0, 0.0)?;
    let mut quad = 0.0f64;
    let mut k = 0.0f64;
    let mut s_min = f64::INFINITY;
    for x in points(8, 601) {
        quad = quad.max(quadratic_spray_fit(&rot, x)?.residual);
        for y in valid_directions(&rot, x)?.into_iter().step_by(4) {
            k = k.max(flag_curvature_2d(&rot, x, y)?.abs());
        }
        s_min = s_min.min(covariant_data(&rot, x, [0.0, 0.0])?.s[0][1].abs());
    }
    outcome(
        pflat && quad <= 1e-8 && k <= 1e-8 && s_min > 1e-3,
        format!("radial pflat {pflat}; rotational: quadratic fit {quad:.2e}, max |K| {k:.2e}, min |s_12| {s_min:.3}"),
    )
}

fn normal_form_chart_family() -> Result<Outcome> {
    let mut hamel = 0.0f64;
    let mut p_gap = 0.0f64;
    let mut k_gap = 0.0f64;
    let mut k_zero = 0.0f64;
    let cases = [
        ("1+x1^2", -2.0, 0.7),
        ("exp(0.5*x1)", -2.0, 0.4),
        ("2+sin(x1)", -0.5, 1.2),
        ("1+x1^2", -2.0, 0.0),
        ("1.5", -3.0, 0.8),
    ];
    for (eta, m, c) in cases {
        let def = normal_form_chart(eta, m, c)?;
        let e = p(eta);
        for x in points(5, 700) {
            let ej = eval_jet(&e, &x, 2)?;
            let (e1, e11) = (ej.partial(&[1, 0, 0, 0])?, ej.partial(&[2, 0, 0, 0])?);
            for y in valid_directions(&def, x)?.into_iter().step_by(3) {
                let y = normalize_alpha(&def, x, y)?;
                let h = hamel_residual(&def, x, y)?;
                hamel = hamel.max(h[0].abs().max(h[1].abs()));
                let pf = projective_factor_formula(ProjectiveCase::Ycw107, &def, x, y, None, None)?;
                p_gap = p_gap.max(pf.discrepancy);
                let k = flag_curvature_2d(&def, x, y)?;
                if c == 0.0 || e.as_const().is_some() {
                    k_zero = k_zero.max(k.abs());
                } else {
                    let f = finsler_function(&def, x, y, 0)?.value();
                    let want = normal_form_flag_curvature(c, e1, e11, f, y[0]);
                    k_gap = k_gap.max((k - want).abs() / want.abs().max(1e-12));
                }
            }
        }
    }
    outcome(
        hamel <= 1e-9 && p_gap <= 1e-9 && k_gap <= 1e-7 && k_zero <= 1e-8,
        format!("Hamel {hamel:.2e}, P gap {p_gap:.2e}, K rel gap {k_gap:.2e}, K where it must vanish {k_zero:.2e}"),
    )
}

fn identity_suite() -> Result<Outcome> {
    let specs = [
        PhiSpec::MKropina { c: 0.0, m: -1.0 },
        PhiSpec::MKropina { c: 0.4, m: -2.0 },
        PhiSpec::MKropina { c: 0.0, m: 3.0 },
        PhiSpec::KropinaLinear { c: 1.0 },
        PhiSpec::KropinaLinear { c: 0.0 },
        PhiSpec::Thm41Ii { k1: 0.3, k2: -0.2 },
        PhiSpec::Thm41Iii { k1: 0.3, k2: -0.2, m: 2.5 },
        PhiSpec::Thm41Iii { k1: 0.0, k2: 0.4, m: -2.0 },
        PhiSpec::Thm41Iv { m: -2.0, k: 0.3 },
        PhiSpec::Thm41IvConstB { m: 3.0, b: 1.2 },
        PhiSpec::Thm41V { m: 2.0, k: 0.5, b: 1.0 },
        PhiSpec::Thm41V { m: 3.0, k: -0.3, b: 1.0 },
    ];
    let mut matched = 0;
    let mut worst = 0.0f64;
    let mut controls = 0;
    let mut weakest = f64::INFINITY;
    for spec in &specs {
        for id in Identity::ALL {
            let mut max = 0.0f64;
            let mut evaluated = false;
            for i in 0..20 {
                let s = 0.05 + 0.85 * i as f64 / 19.0;
                match phi_identity_residual(spec, id, s, 1.0) {
                    Ok(r) => {
                        max = max.max(r);
                        evaluated = true;
                    }
                    Err(Error::CaseMismatch { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            if identity_applies(spec, id) {
                matched += 1;
                worst = worst.max(max);
            } else if evaluated {
                controls += 1;
                weakest = weakest.min(max);
            }
        }
    }
    outcome(
        worst <= 1e-9 && weakest > 1e-3,
        format!("{matched} matching pairs, max residual {worst:.2e}; {controls} controls, min residual {weakest:.2e}"),
    )
}

fn deformation_suite() -> Result<Outcome> {
    let pts = points(8, 800);
    let kropina = random_metric(&mut rng(801), PhiSpec::MKropina { c: 0.0, m: -2.0 });
    let deformed = kropina_deform(&kropina, -2.0, &pts)?.def;
    let mut unit = 0.0f64;
    let mut invariance = 0.0f64;
    for x in &pts {
        unit = unit.max((metric_at(&deformed, *x)?.b2 - 1.0).abs());
        for y in [[0.7, 0.4], [0.9, -0.2]] {
            let f0 = finsler_function(&kropina, *x, y, 0)?.value();
            let f1 = finsler_function(&deformed, *x, y, 0)?.value();
            invariance = invariance.max((f0 - f1).abs() / f0.abs());
        }
    }
    let m3 = m3_example(1.0)?;
    let m3d = m3_deform(&m3, 1.0, &pts)?.def;
    let mut norm = 0.0f64;
    let mut conformal = 0.0f64;
    let mut factor = 0.0f64;
    for x in &pts {
        let c = m3_checks(&m3, &m3d, 1.0, *x)?;
        norm = norm.max(c.norm_residual).max(c.inverse_residual);
        conformal = conformal.max(c.conformal_residual);
        if let Some(pf) = c.predicted_factor {
            factor = factor.max((pf - c.conformal_factor).abs() / pf.abs().max(1e-12));
        }
    }
    let flat = MetricDef::new([[p("1"), p("0")], [p("0"), p("1")]], [p("0.5"), p("0")], PhiSpec::KropinaLinear { c: 0.0 })?;
    let refused = matches!(bar_alpha(&flat, -4.0, &[[1.0, 1.0]]), Err(Error::NotPositiveDefinite { .. }));
    let accepted = bar_alpha(&flat, -3.0, &[[1.0, 1.0]]).is_ok();
    outcome(
        unit <= 1e-10 && invariance <= 1e-12 && norm <= 1e-10 && conformal <= 1e-7 && factor <= 1e-7 && refused && accepted,
        format!(
            "unit norm {unit:.1e}, F invariance {invariance:.1e}, norm/inverse {norm:.1e}, proportionality {conformal:.1e} (factor gap {factor:.1e}), definiteness enforced {refused}"
        ),
    )
}

fn grid_residuals() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut relations = 0.0f64;
    let kropina = random_metric(&mut rng(900), PhiSpec::KropinaLinear { c: 0.0 });
    let m3 = m3_example(1.0)?;
    for (def, is_kropina) in [(&kropina, true), (&m3, false)] {
        for x in points(5, 901) {
            let b = metric_at(def, x)?.b2.sqrt();
            let rep = prop34_residual(def, x, &default_s_grid(b))?;
            worst = worst.max(rep.max_residual);
            if is_kropina {
                let k = rep.kropina.ok_or(Error::RankDeficient)?;
                relations = relations.max(k.g111).max(k.g122).max(k.xi).max(k.g211);
            }
        }
    }
    outcome(
        worst <= 1e-6 && relations <= 1e-6,
        format!("max curve residual {worst:.2e}, Kropina relations {relations:.2e}"),
    )
}

fn jets_against_finite_differences() -> Result<Outcome> {
    let mut r = rng(1000);
    let mut worst = 0.0f64;
    let alphas: [[u8; 2]; 9] = [[1, 0], [0, 1], [2, 0], [1, 1], [2, 1], [0, 3], [4, 0], [2, 2], [1, 3]];
    let pairs = 200;
    for _ in 0..pairs {
        let e = random_field_expr(&mut r, 3);
        let x = Region::default().sample(&mut r);
        let jet = eval_jet(&e, &x, 4)?;
        let f = |q: &[f64]| e.eval(q).unwrap_or(f64::NAN);
        for a in alphas {
            let exact = jet.partial(&[a[0], a[1], 0, 0])?;
            let fd = common::extrapolated_partial(&f, &x, a);
            // absolute 1e-8 below 1e-2, mapped onto the relative scale
            let err = if exact.abs() < 1e-2 {
                (fd - exact).abs() * 1e-6 / 1e-8
            } else {
                (fd - exact).abs() / exact.abs()
            };
            worst = worst.max(err);
        }
    }
    outcome(worst <= 1e-6, format!("{pairs} expressions x 9 partials up to order 4, max scaled error {worst:.2e}"))
}

fn flat_construction_and_identity() -> Result<Outcome> {
    let mut k = 0.0f64;
    let pairs = [
        HarmonicPair::new(p("x1"), p("x2")),
        HarmonicPair::new(p("x1^2-x2^2"), p("2*x1*x2")),
        HarmonicPair::new(p("exp(x1)*cos(x2)"), p("exp(x1)*sin(x2)")),
    ];
    let pts = points(10, 1100);
    for pair in &pairs {
        let def = construct_rem61(pair, &p("1"), 2.0, 0.0, &pts)?.def;
        for x in &pts {
            k = k.max(gauss_curvature(&def, *x)?.abs());
        }
    }
    let mut identity = 0.0f64;
    let mut evaluations = 0;
    for seed in 0..10 {
        let def = random_metric(&mut rng(1200 + seed), PhiSpec::KropinaLinear { c: 0.0 });
        for x in points(10, 1300 + seed) {
            let m = metric_at(&def, x)?;
            identity = identity.max(covariant_data(&def, x, [0.6, 0.8])?.two_dim_identity_residual(m.b, m.b2));
            evaluations += 1;
        }
    }
    outcome(
        k <= 1e-8 && identity <= 1e-10,
        format!("max |K| of the flat construction {k:.2e}; 2D s_ij identity {identity:.2e} over {evaluations} evaluations"),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("spray cross-path agreement", spray_cross_path),
        ("Kropina-linear metrics are Douglas", kropina_always_douglas),
        ("Kropina normal form K12 closed form and flat case", example_kropina_k12),
        ("m = -3 construction is Douglas but not projectively flat", example_m3_not_flat),
        ("radial construction projectively flat, rotational one Minkowskian", examples_flat_and_minkowski),
        ("normal-form chart: Hamel, projective factor, flag curvature", normal_form_chart_family),
        ("phi identity suite", identity_suite),
        ("deformation suite", deformation_suite),
        ("Douglas grid residuals", grid_residuals),
        ("jets against finite differences", jets_against_finite_differences),
        ("flat construction and 2D s_ij identity", flat_construction_and_identity),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {:>2} {} {title}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
