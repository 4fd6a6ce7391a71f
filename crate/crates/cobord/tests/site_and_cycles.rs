//! Site loading, validation diagnostics, and the cycle-level operations on
//! the bundled fixtures.

use cobord::cycles::{
    add, chern, cycle_degree, external_product, make_cycle, product, pullback, pushforward, scale,
    smooth_pullback, Element,
};
use cobord::expr::parse_element;
use cobord::site::{load_site, Site};
use cobord::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn chain3() -> Site {
    load_site(&fixture("chain3.site")).unwrap()
}

fn chain4() -> Site {
    load_site(&fixture("chain4.site")).unwrap()
}

#[test]
fn minimal_point_site_loads() {
    let site = load_site("[objects]\nobject pt dim=0 smooth\n").unwrap();
    assert_eq!(site.objects().count(), 1);
    assert_eq!(site.morphisms().count(), 1);
    let pt = site.object_named("pt").unwrap();
    assert!(site.is_identity(site.identity(pt)));
}

#[test]
fn non_associative_composites_are_rejected() {
    // d.(c.b) resolves to e but (d.c).b resolves to x != e.
    let text = "
[objects]
object P dim=0 smooth
object Q dim=0 smooth
object R dim=0 smooth
object T dim=0 smooth
[morphisms]
morphism b : P -> Q
morphism c : Q -> R
morphism d : R -> T
morphism cb : P -> R
morphism dc : Q -> T
morphism e : P -> T
morphism x : P -> T
[composites]
composite c.b = cb
composite d.c = dc
composite d.cb = e
composite dc.b = x
";
    match load_site(text) {
        Err(Error::Validation(report)) => {
            assert!(report.issues.iter().any(|i| i.rule == "compose-assoc"));
        }
        other => panic!("expected an associativity validation error, got {other:?}"),
    }
}

#[test]
fn chain3_has_the_pinned_shape() {
    let site = chain3();
    assert_eq!(site.objects().count(), 3);
    assert_eq!(site.morphisms().count(), 6);
}

#[test]
fn all_fixtures_validate() {
    for name in ["point.site", "chain3.site", "family.site", "chain4.site", "duality.site"] {
        load_site(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn parse_errors_carry_position_and_rule() {
    match load_site("[objects]\nobject ! dim=0\n") {
        Err(Error::Parse { line, col, .. }) => {
            assert_eq!(line, 2);
            assert!(col > 1);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(
        load_site("[objects]\nobject X dim=0 shiny\n"),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        load_site("object X dim=0\n"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn reldim_mismatch_is_rejected() {
    let text = "
[objects]
object S dim=1 smooth
object X dim=2 smooth
[morphisms]
morphism p : X -> S smooth reldim=2
";
    match load_site(text) {
        Err(Error::Validation(report)) => {
            assert!(report.issues.iter().any(|i| i.rule == "reldim-mismatch"));
        }
        other => panic!("expected a reldim validation error, got {other:?}"),
    }
}

#[test]
fn compose_identity_law_and_declared_composites() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let h = site.morphism_named("h").unwrap();
    let piv = site.morphism_named("piV").unwrap();
    let x = site.object_named("X").unwrap();
    let s = site.object_named("S").unwrap();
    assert_eq!(site.compose(site.identity(s), pix).unwrap(), pix);
    assert_eq!(site.compose(pix, site.identity(x)).unwrap(), pix);
    assert_eq!(site.compose(pix, h).unwrap(), piv);
    assert_eq!(site.rel_dim(site.compose(pix, h).unwrap()), Some(2));
    // Not composable at all.
    assert!(matches!(
        site.compose(h, pix),
        Err(Error::NotComposable(_))
    ));
    // Composable but undeclared: the universe boundary.
    let site4 = chain4();
    let p54 = site4.morphism_named("p54").unwrap();
    let p43 = site4.morphism_named("p43").unwrap();
    assert_eq!(
        site4.compose(p43, p54).unwrap(),
        site4.morphism_named("p53").unwrap()
    );
    let no_composites = load_site(
        "
[objects]
object A dim=0 smooth
object B dim=0 smooth
object C dim=0 smooth
[morphisms]
morphism f : A -> B
morphism g : B -> C
",
    )
    .unwrap();
    let f = no_composites.morphism_named("f").unwrap();
    let g = no_composites.morphism_named("g").unwrap();
    assert!(matches!(
        no_composites.compose(g, f),
        Err(Error::MissingDeclaration(_))
    ));
}

#[test]
fn pull_square_degenerate_declared_and_missing() {
    let site = chain4();
    let p10 = site.morphism_named("p10").unwrap();
    let p20 = site.morphism_named("p20").unwrap();
    let a1 = site.object_named("A1").unwrap();
    let a0 = site.object_named("A0").unwrap();
    // Degenerate square along the identity of the shared target.
    let sq = site.pull_square(p10, site.identity(a0)).unwrap();
    assert_eq!(sq.corner, a1);
    assert_eq!(sq.proj1, site.identity(a1));
    assert_eq!(sq.proj2, p10);
    // Declared square, in both orientations.
    let sq = site.pull_square(p10, p20).unwrap();
    assert_eq!(sq.corner, site.object_named("A3").unwrap());
    assert_eq!(sq.proj1, site.morphism_named("p31").unwrap());
    assert_eq!(sq.proj2, site.morphism_named("p32").unwrap());
    let tr = site.pull_square(p20, p10).unwrap();
    assert_eq!(tr.proj1, site.morphism_named("p32").unwrap());
    assert_eq!(tr.proj2, site.morphism_named("p31").unwrap());
    // Undeclared pair: corner would have dimension six.
    let p53 = site.morphism_named("p53").unwrap();
    let p43 = site.morphism_named("p43").unwrap();
    assert!(matches!(
        site.pull_square(p53, p43),
        Err(Error::MissingDeclaration(_))
    ));
}

#[test]
fn make_cycle_examples() {
    let site = chain3();
    let s = site.object_named("S").unwrap();
    let id_s = site.identity(s);
    // The unit cycle [S ->id S] sits in degree zero.
    let (unit, degree) = make_cycle(&site, id_s, id_s, &[]).unwrap();
    assert_eq!(degree, 0);
    assert!(unit.bundles.is_empty());

    // [V ->h X; L1] over piX has degree 1 - 2 = -1.
    let h = site.morphism_named("h").unwrap();
    let pix = site.morphism_named("piX").unwrap();
    let l1 = site.bundle_named("L1").unwrap();
    let (_, degree) = make_cycle(&site, h, pix, &[l1]).unwrap();
    assert_eq!(degree, -1);

    // [X ->id X] over piX has degree -reldim(piX) = -1.
    let x = site.object_named("X").unwrap();
    let (_, degree) = make_cycle(&site, site.identity(x), pix, &[]).unwrap();
    assert_eq!(degree, -site.rel_dim(pix).unwrap());

    // Structure must be proper and the composite smooth.
    assert!(matches!(
        make_cycle(&site, pix, id_s, &[]),
        Err(Error::NotProper(_))
    ));
    let piv = site.morphism_named("piV").unwrap();
    assert!(matches!(
        make_cycle(&site, h, h, &[]),
        Err(Error::NotComposable(_))
    ));
    let _ = piv;
}

#[test]
fn group_arithmetic_trivialities() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let x = parse_element(&site, pix, "2*[V ->h X; L1] + [X ->id_X X; B1]").unwrap();
    let zero = Element::zero(pix);
    assert_eq!(add(&x, &zero).unwrap(), x);
    assert!(scale(&BigInt::from(0), &x).is_zero());
    assert!(add(&x, &scale(&BigInt::from(-1), &x)).unwrap().is_zero());
    // Arrow mismatch is rejected.
    let piv = site.morphism_named("piV").unwrap();
    assert!(matches!(
        add(&x, &Element::zero(piv)),
        Err(Error::ArrowMismatch(_))
    ));
}

proptest! {
    /// Free abelian group laws on random small elements over chain3.
    #[test]
    fn element_group_laws(coeffs in proptest::collection::vec(-4i64..=4, 4), scalar in -3i64..=3) {
        let site = chain3();
        let pix = site.morphism_named("piX").unwrap();
        let gens = [
            "[X ->id_X X]",
            "[X ->id_X X; B1]",
            "[V ->h X; L1]",
            "[V ->h X; L1,L2]",
        ];
        let mut a = Element::zero(pix);
        let mut b = Element::zero(pix);
        for (i, text) in gens.iter().enumerate() {
            let g = parse_element(&site, pix, text).unwrap();
            a = add(&a, &scale(&BigInt::from(coeffs[i]), &g)).unwrap();
            b = add(&b, &scale(&BigInt::from(coeffs[(i + 1) % 4]), &g)).unwrap();
        }
        // Commutativity and scalar distribution.
        prop_assert_eq!(add(&a, &b).unwrap(), add(&b, &a).unwrap());
        let lhs = scale(&BigInt::from(scalar), &add(&a, &b).unwrap());
        let rhs = add(&scale(&BigInt::from(scalar), &a), &scale(&BigInt::from(scalar), &b)).unwrap();
        prop_assert_eq!(lhs, rhs);
        // Cancellation.
        prop_assert!(add(&a, &scale(&BigInt::from(-1), &a)).unwrap().is_zero());
        // The canonical serialization round-trips.
        let text = cobord::expr::canonical_string(&site, &a);
        if !a.is_zero() {
            let back = parse_element(&site, pix, &text).unwrap();
            prop_assert_eq!(back, a);
        } else {
            prop_assert_eq!(text, "0");
        }
    }
}

#[test]
fn normalization_sorts_bundles_and_respects_iso_classes() {
    let text = "
[objects]
object S dim=0 smooth
object X dim=1 smooth
[morphisms]
morphism p : X -> S smooth reldim=1
[bundles]
bundle La on X
bundle Lb on X
bundle Lc on X
[isoclasses]
iso Lc ~ La
";
    let site = load_site(text).unwrap();
    let p = site.morphism_named("p").unwrap();
    let ab = parse_element(&site, p, "[X ->id_X X; La,Lb]").unwrap();
    let ba = parse_element(&site, p, "[X ->id_X X; Lb,La]").unwrap();
    let cb = parse_element(&site, p, "[X ->id_X X; Lc,Lb]").unwrap();
    assert_eq!(ab, ba);
    assert_eq!(ab, cb);
}

#[test]
fn product_unit_laws_and_chain3_associativity_instance() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let s = site.object_named("S").unwrap();
    let x = site.object_named("X").unwrap();
    let alpha = parse_element(&site, pix, "[V ->h X; L1] + 2*[X ->id_X X; B1]").unwrap();
    let unit_s = Element::unit(&site, s);
    let unit_x = Element::unit(&site, x);
    // alpha . 1_S = alpha (the arrow lands in S).
    assert_eq!(product(&site, &alpha, &unit_s).unwrap(), alpha);
    // 1_X . alpha = alpha.
    assert_eq!(product(&site, &unit_x, &alpha).unwrap(), alpha);
    // Associativity on the declared triple (piX, id_S, id_S).
    let lhs = product(
        &site,
        &product(&site, &alpha, &unit_s).unwrap(),
        &unit_s,
    )
    .unwrap();
    let rhs = product(
        &site,
        &alpha,
        &product(&site, &unit_s, &unit_s).unwrap(),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn product_degrees_add_and_deep_associativity_on_chain4() {
    let site = chain4();
    let p32 = site.morphism_named("p32").unwrap();
    let p21 = site.morphism_named("p21").unwrap();
    let p10 = site.morphism_named("p10").unwrap();
    let alpha = parse_element(&site, p32, "[A3 ->id_A3 A3; u13]").unwrap();
    let beta = parse_element(&site, p21, "[A3 ->p32 A2; v23]").unwrap();
    let gamma = parse_element(&site, p10, "[A1 ->id_A1 A1; u1]").unwrap();
    let adeg = alpha.degrees(&site).unwrap()[0];
    let bdeg = beta.degrees(&site).unwrap()[0];
    let ab = product(&site, &alpha, &beta).unwrap();
    assert_eq!(ab.degrees(&site).unwrap(), vec![adeg + bdeg]);
    let lhs = product(&site, &ab, &gamma).unwrap();
    let rhs = product(&site, &alpha, &product(&site, &beta, &gamma).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    assert!(!lhs.is_zero());
    // A product whose corners use a genuinely declared square.
    let deep = product(
        &site,
        &parse_element(&site, p32, "[A3 ->id_A3 A3]").unwrap(),
        &parse_element(&site, p21, "[A3 ->p32 A2; v23]").unwrap(),
    )
    .unwrap();
    let expected = parse_element(
        &site,
        site.compose(p21, p32).unwrap(),
        "[A4 ->p43 A3; v24]",
    )
    .unwrap();
    assert_eq!(deep, expected);
}

#[test]
fn pushforward_examples() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let piv = site.morphism_named("piV").unwrap();
    let h = site.morphism_named("h").unwrap();
    let v = site.object_named("V").unwrap();
    let alpha = parse_element(&site, piv, "3*[V ->id_V V; L1]").unwrap();
    // Identity pushforward.
    assert_eq!(
        pushforward(&site, site.identity(v), piv, &alpha).unwrap(),
        alpha
    );
    // Along h: relabels the structure morphism, preserves degree.
    let pushed = pushforward(&site, h, pix, &alpha).unwrap();
    assert_eq!(
        pushed,
        parse_element(&site, pix, "3*[V ->h X; L1]").unwrap()
    );
    assert_eq!(pushed.degrees(&site).unwrap(), alpha.degrees(&site).unwrap());
    // Functoriality (g.f)_* = g_*.f_* on chain4.
    let site4 = chain4();
    let p43 = site4.morphism_named("p43").unwrap();
    let p32 = site4.morphism_named("p32").unwrap();
    let p42 = site4.morphism_named("p42").unwrap();
    let p20 = site4.morphism_named("p20").unwrap();
    let p30 = site4.morphism_named("p30").unwrap();
    let p40 = site4.morphism_named("p40").unwrap();
    let a = parse_element(&site4, p40, "[A5 ->p54 A4; u15]").unwrap();
    let lhs = pushforward(&site4, p42, p20, &a).unwrap();
    let rhs = pushforward(
        &site4,
        p32,
        p20,
        &pushforward(&site4, p43, p30, &a).unwrap(),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
    // Wrong factorization is an arrow mismatch.
    assert!(matches!(
        pushforward(&site, h, piv, &alpha),
        Err(Error::ArrowMismatch(_)) | Err(Error::NotComposable(_))
    ));
}

#[test]
fn pullback_examples() {
    let site = chain4();
    let p10 = site.morphism_named("p10").unwrap();
    let p20 = site.morphism_named("p20").unwrap();
    let p30 = site.morphism_named("p30").unwrap();
    let p32 = site.morphism_named("p32").unwrap();
    let a0 = site.object_named("A0").unwrap();
    let alpha = parse_element(&site, p10, "[A2 ->p21 A1; v2]").unwrap();
    // Pullback along the identity is the identity.
    assert_eq!(
        pullback(&site, site.identity(a0), &alpha).unwrap(),
        alpha
    );
    // Degree is preserved along a declared square.
    let pulled = pullback(&site, p20, &alpha).unwrap();
    assert_eq!(pulled.degrees(&site).unwrap(), alpha.degrees(&site).unwrap());
    // Functoriality (g.h)* = h*.g* against the square stack over p10.
    let g = p20;
    let h = p32;
    let gh = site.compose(g, h).unwrap();
    assert_eq!(gh, p30);
    let lhs = pullback(&site, gh, &alpha).unwrap();
    let sq = site.pull_square(p10, g).unwrap();
    let rhs = pullback(&site, h, &pullback(&site, g, &alpha).unwrap()).unwrap();
    let _ = sq;
    assert_eq!(lhs, rhs);
}

#[test]
fn chern_examples() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let x = site.object_named("X").unwrap();
    let b1 = site.bundle_named("B1").unwrap();
    let b2 = site.bundle_named("B2").unwrap();
    let alpha = parse_element(&site, pix, "[X ->id_X X]").unwrap();
    // Chern operators commute and raise the degree by one.
    let ab = chern(&site, b1, &chern(&site, b2, &alpha).unwrap()).unwrap();
    let ba = chern(&site, b2, &chern(&site, b1, &alpha).unwrap()).unwrap();
    assert_eq!(ab, ba);
    let once = chern(&site, b1, &alpha).unwrap();
    assert_eq!(
        once.degrees(&site).unwrap()[0],
        alpha.degrees(&site).unwrap()[0] + 1
    );
    // On the identity generator the operator just appends the bundle.
    assert_eq!(once, parse_element(&site, pix, "[X ->id_X X; B1]").unwrap());
    // Chern of the zero element is zero.
    assert!(chern(&site, b1, &Element::zero(pix)).unwrap().is_zero());
    let _ = x;
}

#[test]
fn external_product_examples() {
    let site = chain4();
    let p10 = site.morphism_named("p10").unwrap();
    let p20 = site.morphism_named("p20").unwrap();
    let a0 = site.object_named("A0").unwrap();
    let alpha = parse_element(&site, p10, "[A1 ->id_A1 A1; u1]").unwrap();
    let beta = parse_element(&site, p20, "[A2 ->id_A2 A2; v2]").unwrap();
    // Unit law.
    assert_eq!(
        external_product(&site, &alpha, &Element::unit(&site, a0)).unwrap(),
        alpha
    );
    // Degrees add.
    let ab = external_product(&site, &alpha, &beta).unwrap();
    assert_eq!(
        ab.degrees(&site).unwrap()[0],
        alpha.degrees(&site).unwrap()[0] + beta.degrees(&site).unwrap()[0]
    );
    // Commutativity through the transposed square.
    let ba = external_product(&site, &beta, &alpha).unwrap();
    assert_eq!(ab, ba);
    // Chern slides across through the first projection (the A8 shape).
    let u1 = site.bundle_named("u1").unwrap();
    let lhs = external_product(&site, &chern(&site, u1, &alpha).unwrap(), &beta).unwrap();
    let sq = site.pull_square(p10, p20).unwrap();
    let pl = site.pullback_bundle(sq.proj1, u1).unwrap();
    let rhs = chern(&site, pl, &ab).unwrap();
    assert_eq!(lhs, rhs);
    // Pushforward compatibility (f x g)_* (A6 shape) on the diagonal-free
    // poset: f = p21: A2 -> A1, g = id.
    let p21 = site.morphism_named("p21").unwrap();
    let a2cycle = parse_element(&site, p20, "[A2 ->id_A2 A2; u12]").unwrap();
    let lhs = external_product(
        &site,
        &pushforward(&site, p21, p10, &a2cycle).unwrap(),
        &beta,
    )
    .unwrap();
    // f x_S g with g the identity of A2 is the product morphism A4 -> A3.
    let p43 = site.morphism_named("p43").unwrap();
    let p30 = site.morphism_named("p30").unwrap();
    let rhs = pushforward(
        &site,
        p43,
        p30,
        &external_product(&site, &a2cycle, &beta).unwrap(),
    )
    .unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn smooth_pullback_examples() {
    let site = chain3();
    let pix = site.morphism_named("piX").unwrap();
    let s = site.object_named("S").unwrap();
    let unit_s = Element::unit(&site, s);
    // pi_X^* 1_S = [X ->id X], dropping the degree by reldim.
    let pulled = smooth_pullback(&site, pix, &unit_s).unwrap();
    assert_eq!(pulled, parse_element(&site, pix, "[X ->id_X X]").unwrap());
    assert_eq!(pulled.degrees(&site).unwrap(), vec![-1]);
    // Identity smooth pullback.
    let x = site.object_named("X").unwrap();
    let alpha = parse_element(&site, pix, "[V ->h X; L1]").unwrap();
    assert_eq!(
        smooth_pullback(&site, site.identity(x), &alpha).unwrap(),
        alpha
    );
    // Functoriality on chain4: (g.f)* = f*.g*.
    let site4 = chain4();
    let p10 = site4.morphism_named("p10").unwrap();
    let p21 = site4.morphism_named("p21").unwrap();
    let p32 = site4.morphism_named("p32").unwrap();
    let p31 = site4.morphism_named("p31").unwrap();
    let a = parse_element(&site4, p10, "[A1 ->id_A1 A1; u1]").unwrap();
    let lhs = smooth_pullback(&site4, p31, &a).unwrap();
    let rhs = smooth_pullback(&site4, p32, &smooth_pullback(&site4, p21, &a).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    // The degree drops by reldim f.
    assert_eq!(
        lhs.degrees(&site4).unwrap()[0],
        a.degrees(&site4).unwrap()[0] - site4.rel_dim(p31).unwrap()
    );
    // Non-smooth morphisms are rejected.
    let h = site.morphism_named("h").unwrap();
    let piv = site.morphism_named("piV").unwrap();
    let over_v = parse_element(&site, pix, "[V ->h X; L1]").unwrap();
    let _ = piv;
    assert!(matches!(
        smooth_pullback(&site, h, &over_v),
        Err(Error::NotSmooth(_))
    ));
}

#[test]
fn degree_formula_matches_the_classical_convention_at_a_point() {
    let site = load_site(&fixture("duality.site")).unwrap();
    let px = site.morphism_named("pX").unwrap();
    let r1 = site.morphism_named("r1").unwrap();
    let ell1 = site.bundle_named("ell1").unwrap();
    // -i + r = dim V over a point base.
    let (cycle, i) = make_cycle(&site, r1, px, &[ell1, ell1]).unwrap();
    let dim_v = site.object(cycle.source(&site)).dim as i64;
    assert_eq!(-i + cycle.r() as i64, dim_v);
    assert_eq!(cycle_degree(&site, &cycle, px).unwrap(), i);
}
