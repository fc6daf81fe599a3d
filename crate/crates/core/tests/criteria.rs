use finsler_core::catalog::{self, cases, m3_example, m3_example_k12, m3_example_printed, run_all};
use finsler_core::criteria::{
    case_constants, classify, rij_condition_check, rij_condition_check_with, spray_form_fit, RijCase, SprayFormCase, NOT_DOUGLAS,
};
use finsler_core::curvature::{k12_homogeneity_degree, k12_linear_fit, k_curvature, scalar_flag_h_residual};
use finsler_core::deform::linear_chart_change;
use finsler_core::par::Execution;
use finsler_core::phi::PhiSpec;
use finsler_core::sampling::{random_metric, rng, valid_directions, Region, DEFAULT_SEED};

fn points(seed: u64) -> Vec<[f64; 2]> {
    Region::default().points(20, seed)
}

#[test]
fn each_representative_meets_its_own_condition() {
    let pts = points(11);
    for case in RijCase::ALL {
        let def = cases::representative(case).unwrap();
        for x in &pts {
            let r = rij_condition_check(case, &def, *x).unwrap();
            assert!(r.verdict.passed() && r.residual <= 1e-12, "{} at {x:?}: {:.3e}", case.name(), r.residual);
        }
        let cl = classify(&def, &pts, Execution::Sequential);
        assert!(cl.douglas, "{}", case.name());
        assert_eq!(cl.passing_cases, vec![case]);
        assert_eq!(cl.label, case.label());
    }
}

#[test]
fn random_data_fails_every_compatible_condition() {
    let pts = points(12);
    for (seed, phi) in [(3, PhiSpec::MKropina { c: 0.0, m: 2.0 }), (4, PhiSpec::MKropina { c: 0.5, m: -3.0 })] {
        let def = random_metric(&mut rng(seed), phi.clone());
        let cl = classify(&def, &pts, Execution::Sequential);
        assert!(!cl.douglas && cl.passing_cases.is_empty(), "{phi:?}");
        assert_eq!(cl.label, NOT_DOUGLAS);
    }
}

#[test]
fn catalog_is_clean_and_mode_independent() {
    let seq = run_all(DEFAULT_SEED, Execution::Sequential);
    for e in &seq {
        assert!(e.ok, "{}: {:?}", e.name, e.checks);
    }
    assert_eq!(seq, run_all(DEFAULT_SEED, Execution::Parallel));
}

#[test]
fn m3_example_k12_is_linear_of_degree_one() {
    let def = m3_example(1.0).unwrap();
    for x in points(13) {
        let fit = k12_linear_fit(&def, x).unwrap();
        assert!(fit.residual <= 1e-9 && fit.max_abs > 1e-3, "{x:?}: {fit:?}");
        let deg = k12_homogeneity_degree(&def, x, [0.3, 0.8]).unwrap();
        assert!((deg - 1.0).abs() <= 1e-9, "{x:?}: degree {deg}");
    }
}

#[test]
fn m3_example_matches_regrouped_printed_form() {
    let def = m3_example(1.0).unwrap();
    let mut literal_gap = 0.0f64;
    for x in points(14) {
        let (a1, a2) = m3_example_printed(x, true);
        for y in valid_directions(&def, x).unwrap() {
            let k = k_curvature(&def, x, y).unwrap();
            let want = m3_example_k12(x, y, a1, a2);
            let size = m3_example_k12(x, y, a1.abs(), 0.0).abs() + m3_example_k12(x, y, 0.0, a2.abs()).abs();
            assert!((k - want).abs() <= 1e-9 * size, "{x:?} {y:?}: {k} vs {want}");
        }
        let (l1, _) = m3_example_printed(x, false);
        literal_gap = literal_gap.max((l1 - a1).abs());
    }
    assert!(literal_gap > 1.0, "the literal reading only differs by the misplaced term");
}

#[test]
fn normal_form_chart_survives_a_linear_chart_change() {
    let thm14 = (catalog::find("thm14").unwrap().build)().unwrap();
    let moved = linear_chart_change(&thm14, [[1.2, 0.3], [-0.4, 0.9]]).unwrap();
    for x in points(15) {
        let w = spray_form_fit(SprayFormCase::W3, &moved, x, None).unwrap();
        assert!(w.holds && w.residual <= 1e-10, "{x:?}: {w:?}");
    }
}

#[test]
fn normal_form_chart_has_scalar_flag_curvature() {
    let thm14 = (catalog::find("thm14").unwrap().build)().unwrap();
    for x in points(16) {
        for y in valid_directions(&thm14, x).unwrap() {
            let h = scalar_flag_h_residual(&thm14, x, y).unwrap();
            assert!(h <= 1e-6, "{x:?} {y:?}: {h:.3e}");
        }
    }
}


/// Cases each representative also satisfies when checked with its own constants.
fn also_passes(case: RijCase) -> &'static [RijCase] {
    use RijCase::*;
    match case {
        Thm41IvConstb => &[Thm41Iv, Thm41V],
        Thm41V => &[Thm41IvConstb],
        Cor61Iii => &[Thm41Iii, Thm41Iv, Cor61Iv],
        Cor61Iv => &[Thm41Iv],
        _ => &[],
    }
}

#[test]
fn case_matrix_has_only_the_known_containments() {
    let pts = points(17);
    for own in RijCase::ALL {
        let def = cases::representative(own).unwrap();
        let k = case_constants(own, &def.phi).unwrap();
        for other in RijCase::ALL {
            let worst = pts
                .iter()
                .map(|x| rij_condition_check_with(other, k, &def, *x).unwrap().residual)
                .fold(0.0, f64::max);
            let expect = other == own || also_passes(own).contains(&other);
            if expect {
                assert!(worst <= 1e-12, "{} should pass {}: {worst:.3e}", own.name(), other.name());
            } else {
                assert!(worst > 1e-3, "{} should fail {}: {worst:.3e}", own.name(), other.name());
            }
        }
    }
}
