//! The axiom suite, cap product, duality maps and resolution systems on the
//! bundled fixtures.

use std::collections::BTreeMap;

use cobord::analysis::{
    cap_product, duality_d_pi, resolution_compare_all, run_axiom_suite, specialization_check,
    transition_coherence, Compare, ResolutionSystem, SuiteConfig,
};
use cobord::cycles::Element;
use cobord::expr::parse_element;
use cobord::quotient::Universe;
use cobord::site::{load_site, parse_site_unvalidated, Site};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn load(name: &str) -> Site {
    load_site(&fixture(name)).unwrap()
}

const BIVARIANT: [&str; 9] = [
    "A1", "A2", "A3", "A12", "A13", "A23", "A123", "Units", "Comm",
];

#[test]
fn point_site_passes_vacuously_or_on_identities() {
    let site = load("point.site");
    let reports = run_axiom_suite(&site, SuiteConfig::default());
    for rep in &reports {
        assert!(rep.violations.is_empty(), "{}: {:?}", rep.id, rep.violations);
    }
    // Everything that ran did so on identity instances.
    for rep in &reports {
        assert_eq!(rep.nontrivial, 0, "{} had a nontrivial instance", rep.id);
    }
}

#[test]
fn chain3_passes_with_nontrivial_unit_and_grading_instances() {
    let site = load("chain3.site");
    let reports = run_axiom_suite(&site, SuiteConfig::default());
    let by_id: BTreeMap<&str, _> = reports.iter().map(|r| (r.id, r)).collect();
    for rep in &reports {
        assert!(rep.violations.is_empty(), "{}: {:?}", rep.id, rep.violations);
    }
    assert!(by_id["Units"].nontrivial > 0);
    assert!(by_id["A1"].nontrivial > 0);
    assert!(by_id["grading-chern"].nontrivial > 0);
}

#[test]
fn chain4_covers_every_bivariant_axiom_nontrivially() {
    let site = load("chain4.site");
    let cfg = SuiteConfig {
        bundle_cap: 1,
        max_gens_per_arrow: 3,
        max_instances: 64,
    };
    let reports = run_axiom_suite(&site, cfg);
    let by_id: BTreeMap<&str, _> = reports.iter().map(|r| (r.id, r)).collect();
    for rep in &reports {
        assert!(rep.violations.is_empty(), "{}: {:?}", rep.id, rep.violations);
    }
    for id in BIVARIANT {
        let rep = by_id[id];
        assert!(
            rep.nontrivial > 0,
            "{id} had no nontrivial instance (checked {}, skipped {})",
            rep.checked,
            rep.skipped.len()
        );
    }
    // The over-category package and the grading laws bite too.
    for id in [
        "D4-unit",
        "D4-comm",
        "OC-A1",
        "OC-A2",
        "OC-A3",
        "OC-A4",
        "OC-A5",
        "OC-A8",
        "grading-product",
        "grading-pushforward",
        "grading-pullback",
        "grading-chern",
        "grading-smooth-pullback",
    ] {
        assert!(by_id[id].nontrivial > 0, "{id} had no nontrivial instance");
    }
}

#[test]
fn fault_injected_composite_produces_an_a2_witness() {
    // The triple composite is deliberately non-associative: q20.p32 is bound
    // to r30 while p10.(p21.p32) resolves to p30, so the two pushforward
    // routes relabel a structure morphism differently. Validation would
    // reject this site; the suite must catch it when validation is bypassed.
    let text = "
[objects]
object A0 dim=0 smooth
object A1 dim=1 smooth
object A2 dim=2 smooth
object A3 dim=3 smooth
[morphisms]
morphism p10 : A1 -> A0 proper smooth reldim=1
morphism p21 : A2 -> A1 proper smooth reldim=1
morphism p32 : A3 -> A2 proper smooth reldim=1
morphism q20 : A2 -> A0 proper smooth reldim=2
morphism p31 : A3 -> A1 proper smooth reldim=2
morphism p30 : A3 -> A0 proper smooth reldim=3
morphism r30 : A3 -> A0 proper smooth reldim=3
[composites]
composite p10.p21 = q20
composite p21.p32 = p31
composite p10.p31 = p30
composite q20.p32 = r30
";
    let site = parse_site_unvalidated(text).unwrap();
    assert!(
        !cobord::site::validate_site(&site).is_empty(),
        "validation should see the defect"
    );
    let reports = run_axiom_suite(
        &site,
        SuiteConfig {
            bundle_cap: 0,
            max_gens_per_arrow: 3,
            max_instances: 64,
        },
    );
    let a2 = reports.iter().find(|r| r.id == "A2").unwrap();
    assert!(
        !a2.violations.is_empty(),
        "expected an A2 witness from the fault-injected composite"
    );
}

#[test]
fn cap_product_on_the_smooth_part_is_the_identity() {
    let site = load("duality.site");
    let py = site.morphism_named("pY").unwrap();
    let y = site.object_named("Y").unwrap();
    let id_y = site.identity(y);
    let alpha = parse_element(&site, id_y, "2*[W ->k Y; bW] - [Y ->id_Y Y]").unwrap();
    let beta = Element::fundamental_class(&site, py).unwrap();
    let capped = cap_product(&site, &alpha, &beta).unwrap();
    // Same cycle list, now over pY.
    let expected = parse_element(&site, py, "2*[W ->k Y; bW] - [Y ->id_Y Y]").unwrap();
    assert_eq!(capped, expected);
    // Zero capped with anything is zero.
    assert!(cap_product(&site, &Element::zero(id_y), &beta)
        .unwrap()
        .is_zero());
    // Degree arithmetic: i in the contravariant theory lands in
    // dim X - i homologically, i.e. cohomological degree i - dim X.
    let one = parse_element(&site, id_y, "[W ->k Y; bW]").unwrap();
    let i = one.degrees(&site).unwrap()[0];
    let capped = cap_product(&site, &one, &beta).unwrap();
    let dim_y = site.object(y).dim as i64;
    assert_eq!(capped.degrees(&site).unwrap(), vec![i - dim_y]);
}

#[test]
fn duality_transitions_cohere_along_the_refinement_chain() {
    let site = load("duality.site");
    let px = site.morphism_named("pX").unwrap();
    let x = site.object_named("X").unwrap();
    let id_x = site.identity(x);
    let universe = Universe::build(&site, id_x, 2, 1 << 20).unwrap();
    let alphas: Vec<Element> = (0..universe.len()).map(|i| universe.element_of(i)).collect();
    assert_eq!(universe.len(), 3); // [X ->id X; ell^0..2]

    let sys = ResolutionSystem::for_object(&site, x);
    assert_eq!(sys.resolutions.len(), 5);
    let report = transition_coherence(&site, &sys, px, &alphas).unwrap();
    assert!(report.pairs >= 5, "expected every declared related pair");
    assert!(report.instances > 0);
    assert!(report.violations.is_empty(), "{:?}", report.violations);

    // D_pi through r1 is capping with [T1 ->r1 X].
    let r1 = site.morphism_named("r1").unwrap();
    let alpha = parse_element(&site, id_x, "[X ->id_X X; ell]").unwrap();
    let d1 = duality_d_pi(&site, r1, px, &alpha).unwrap();
    assert_eq!(d1, parse_element(&site, px, "[T1 ->r1 X; ell1]").unwrap());
    // The zero element maps to zero.
    assert!(duality_d_pi(&site, r1, px, &Element::zero(id_x))
        .unwrap()
        .is_zero());
}

#[test]
fn smooth_objects_use_the_identity_resolution() {
    let site = load("duality.site");
    let y = site.object_named("Y").unwrap();
    let py = site.morphism_named("pY").unwrap();
    let id_y = site.identity(y);
    let sys = ResolutionSystem::for_object(&site, y);
    assert_eq!(sys.resolutions, vec![id_y]);
    // D_id is the identity on representatives.
    let alpha = parse_element(&site, id_y, "[W ->k Y; bW]").unwrap();
    let d = duality_d_pi(&site, id_y, py, &alpha).unwrap();
    assert_eq!(d, parse_element(&site, py, "[W ->k Y; bW]").unwrap());
}

#[test]
fn resolution_comparison_outcomes() {
    let site = load("duality.site");
    let x = site.object_named("X").unwrap();
    let sys = ResolutionSystem::for_object(&site, x);
    let r = |name: &str| site.morphism_named(name).unwrap();
    // Reflexive.
    assert_eq!(sys.compare(&site, r("r1"), r("r1")), Compare::Le);
    // Declared refinement.
    assert_eq!(sys.compare(&site, r("r1"), r("r2")), Compare::Le);
    assert_eq!(sys.compare(&site, r("r2"), r("r1")), Compare::Ge);
    // Only a common upper bound is declared.
    assert_eq!(
        sys.compare(&site, r("r2"), r("r3")),
        Compare::IncomparableWithDeclaredBound
    );
    // Nothing relates r5 to the chain.
    assert_eq!(sys.compare(&site, r("r2"), r("r5")), Compare::Incomparable);
    // The full comparison table is consistent with itself.
    let table = resolution_compare_all(&site, &sys);
    assert_eq!(table.len(), sys.resolutions.len() * sys.resolutions.len());
}

#[test]
fn specialization_over_the_point_base() {
    let site = load("duality.site");
    let px = site.morphism_named("pX").unwrap();
    let universe = Universe::build(&site, px, 3, 1 << 20).unwrap();
    let report = specialization_check(&site, px, &universe).unwrap();
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert!(report.generators > 0);
}
