//! Invariant validation for a parsed site. Every check here is exhaustive
//! over the declared (finite) tables; nothing is synthesized.

use super::{MorphId, Site};
use crate::error::Issue;

pub(super) fn validate(site: &Site) -> Vec<Issue> {
    let mut issues = Vec::new();
    morphism_flags(site, &mut issues);
    composites(site, &mut issues);
    associativity(site, &mut issues);
    squares(site, &mut issues);
    pullback_functoriality(site, &mut issues);
    tensor_laws(site, &mut issues);
    sections(site, &mut issues);
    resolutions(site, &mut issues);
    issues
}

fn issue(issues: &mut Vec<Issue>, rule: &'static str, line: usize, msg: String) {
    issues.push(Issue {
        rule,
        line: Some(line),
        msg,
    });
}

fn morphism_flags(site: &Site, issues: &mut Vec<Issue>) {
    for m in site.morphisms() {
        let md = site.morphism(m);
        match (md.is_smooth, md.rel_dim) {
            (true, None) => issue(
                issues,
                "reldim-presence",
                md.line,
                format!("smooth morphism `{}` must declare reldim", md.name),
            ),
            (false, Some(_)) => issue(
                issues,
                "reldim-presence",
                md.line,
                format!("non-smooth morphism `{}` must not declare reldim", md.name),
            ),
            (true, Some(r)) => {
                let expected =
                    site.object(md.source).dim as i64 - site.object(md.target).dim as i64;
                if r != expected {
                    issue(
                        issues,
                        "reldim-mismatch",
                        md.line,
                        format!(
                            "morphism `{}`: reldim {} but dim {} - dim {} = {}",
                            md.name,
                            r,
                            site.obj_name(md.source),
                            site.obj_name(md.target),
                            expected
                        ),
                    );
                }
            }
            (false, None) => {}
        }
    }
}

fn composites(site: &Site, issues: &mut Vec<Issue>) {
    for (&(g, f), &k) in &site.composites {
        let line = site.composite_lines.get(&(g, f)).copied().unwrap_or(0);
        let gd = site.morphism(g);
        let fd = site.morphism(f);
        let kd = site.morphism(k);
        if fd.target != gd.source {
            issue(
                issues,
                "compose-typing",
                line,
                format!("composite `{}`.`{}`: the pair is not composable", gd.name, fd.name),
            );
            continue;
        }
        if kd.source != fd.source || kd.target != gd.target {
            issue(
                issues,
                "compose-typing",
                line,
                format!(
                    "composite `{}`.`{}` = `{}`: result has the wrong source or target",
                    gd.name, fd.name, kd.name
                ),
            );
            continue;
        }
        if gd.is_proper && fd.is_proper && !kd.is_proper {
            issue(
                issues,
                "compose-closure-proper",
                line,
                format!(
                    "composite `{}` of proper morphisms `{}` and `{}` must be proper",
                    kd.name, gd.name, fd.name
                ),
            );
        }
        if gd.is_smooth && fd.is_smooth {
            if !kd.is_smooth {
                issue(
                    issues,
                    "compose-closure-smooth",
                    line,
                    format!(
                        "composite `{}` of smooth morphisms `{}` and `{}` must be smooth",
                        kd.name, gd.name, fd.name
                    ),
                );
            } else if kd.rel_dim != Some(gd.rel_dim.unwrap_or(0) + fd.rel_dim.unwrap_or(0)) {
                issue(
                    issues,
                    "compose-closure-smooth",
                    line,
                    format!(
                        "composite `{}`: reldim must be reldim({}) + reldim({})",
                        kd.name, gd.name, fd.name
                    ),
                );
            }
        }
    }
}

/// `h.(g.f) = (h.g).f` whenever both sides resolve from the table.
fn associativity(site: &Site, issues: &mut Vec<Issue>) {
    for (&(g, f), &gf) in &site.composites {
        for (&(h, g2), &hg) in &site.composites {
            if g2 != g {
                continue;
            }
            let lhs = site.compose(h, gf);
            let rhs = site.compose(hg, f);
            if let (Ok(l), Ok(r)) = (lhs, rhs) {
                if l != r {
                    let line = site.composite_lines.get(&(g, f)).copied().unwrap_or(0);
                    issue(
                        issues,
                        "compose-assoc",
                        line,
                        format!(
                            "`{}`.(`{}`.`{}`) = `{}` but (`{}`.`{}`).`{}` = `{}`",
                            site.morph_name(h),
                            site.morph_name(g),
                            site.morph_name(f),
                            site.morph_name(l),
                            site.morph_name(h),
                            site.morph_name(g),
                            site.morph_name(f),
                            site.morph_name(r)
                        ),
                    );
                }
            }
        }
    }
}

fn squares(site: &Site, issues: &mut Vec<Issue>) {
    for (&(f, g), sq) in &site.squares {
        let line = site
            .square_lines
            .get(&(f, g))
            .or_else(|| site.square_lines.get(&(g, f)))
            .copied()
            .unwrap_or(0);
        let fd = site.morphism(f);
        let gd = site.morphism(g);
        let p1 = site.morphism(sq.proj1);
        let p2 = site.morphism(sq.proj2);
        if fd.target != gd.target {
            issue(
                issues,
                "square-typing",
                line,
                format!("square (`{}`, `{}`): legs do not share a target", fd.name, gd.name),
            );
            continue;
        }
        if p1.source != sq.corner || p1.target != fd.source || p2.source != sq.corner || p2.target != gd.source {
            issue(
                issues,
                "square-typing",
                line,
                format!(
                    "square (`{}`, `{}`): projections must map corner `{}` to `{}` and `{}`",
                    fd.name,
                    gd.name,
                    site.obj_name(sq.corner),
                    site.obj_name(fd.source),
                    site.obj_name(gd.source)
                ),
            );
            continue;
        }
        // Commutativity must be witnessed inside the composition table.
        match (site.compose(f, sq.proj1), site.compose(g, sq.proj2)) {
            (Ok(l), Ok(r)) => {
                if l != r {
                    issue(
                        issues,
                        "square-commutes",
                        line,
                        format!(
                            "square (`{}`, `{}`): `{}`.`{}` = `{}` but `{}`.`{}` = `{}`",
                            fd.name,
                            gd.name,
                            fd.name,
                            p1.name,
                            site.morph_name(l),
                            gd.name,
                            p2.name,
                            site.morph_name(r)
                        ),
                    );
                }
            }
            _ => issue(
                issues,
                "square-commutes",
                line,
                format!(
                    "square (`{}`, `{}`): both composites `{}`.`{}` and `{}`.`{}` must be declared",
                    fd.name, gd.name, fd.name, p1.name, gd.name, p2.name
                ),
            ),
        }
        // Properness and smoothness are closed under base change; the
        // relative dimension is preserved by the pullback.
        if gd.is_proper && !p1.is_proper {
            issue(
                issues,
                "square-flags",
                line,
                format!("square (`{}`, `{}`): pullback `{}` of proper `{}` must be proper", fd.name, gd.name, p1.name, gd.name),
            );
        }
        if gd.is_smooth && (!p1.is_smooth || p1.rel_dim != gd.rel_dim) {
            issue(
                issues,
                "square-flags",
                line,
                format!(
                    "square (`{}`, `{}`): pullback `{}` of smooth `{}` must be smooth with reldim {}",
                    fd.name,
                    gd.name,
                    p1.name,
                    gd.name,
                    gd.rel_dim.unwrap_or(0)
                ),
            );
        }
        if fd.is_proper && !p2.is_proper {
            issue(
                issues,
                "square-flags",
                line,
                format!("square (`{}`, `{}`): pullback `{}` of proper `{}` must be proper", fd.name, gd.name, p2.name, fd.name),
            );
        }
        if fd.is_smooth && (!p2.is_smooth || p2.rel_dim != fd.rel_dim) {
            issue(
                issues,
                "square-flags",
                line,
                format!(
                    "square (`{}`, `{}`): pullback `{}` of smooth `{}` must be smooth with reldim {}",
                    fd.name,
                    gd.name,
                    p2.name,
                    fd.name,
                    fd.rel_dim.unwrap_or(0)
                ),
            );
        }
    }
}

/// `(g.f)* L = f* (g* L)` whenever all three pullbacks are declared.
fn pullback_functoriality(site: &Site, issues: &mut Vec<Issue>) {
    for (&(g, l), &p) in &site.pullbacks {
        for (&(f, p2), &q) in &site.pullbacks {
            if site.canon(p2) != site.canon(p) {
                continue;
            }
            if site.morphism(f).target != site.morphism(g).source {
                continue;
            }
            let gf = match site.compose(g, f) {
                Ok(m) => m,
                Err(_) => continue,
            };
            if let Ok(r) = site.pullback_bundle(gf, l) {
                if r != site.canon(q) {
                    let line = site.pullback_lines.get(&(f, p2)).copied().unwrap_or(0);
                    issue(
                        issues,
                        "pullback-functorial",
                        line,
                        format!(
                            "(`{}`.`{}`)* `{}` = `{}` but `{}`*(`{}`* `{}`) = `{}`",
                            site.morph_name(g),
                            site.morph_name(f),
                            site.bundle_name(l),
                            site.bundle_name(r),
                            site.morph_name(f),
                            site.morph_name(g),
                            site.bundle_name(l),
                            site.bundle_name(site.canon(q))
                        ),
                    );
                }
            }
        }
    }
}

fn tensor_laws(site: &Site, issues: &mut Vec<Issue>) {
    // Associativity up to iso class, on declared instances.
    let pairs: Vec<_> = site.tensors.iter().map(|(&k, &v)| (k, site.canon(v))).collect();
    for &((l, m), p) in &pairs {
        for &((p2, k), q) in &pairs {
            if p2 != p && k != p {
                continue;
            }
            let kk = if p2 == p { k } else { p2 };
            // (l (x) m) (x) kk = q; compare with l (x) (m (x) kk).
            if let Ok(r) = site.tensor(m, kk) {
                if let Ok(q2) = site.tensor(l, r) {
                    if q2 != q {
                        issue(
                            issues,
                            "tensor-associative",
                            0,
                            format!(
                                "(`{}` (x) `{}`) (x) `{}` and `{}` (x) (`{}` (x) `{}`) are not isomorphic",
                                site.bundle_name(l),
                                site.bundle_name(m),
                                site.bundle_name(kk),
                                site.bundle_name(l),
                                site.bundle_name(m),
                                site.bundle_name(kk)
                            ),
                        );
                    }
                }
            }
        }
    }
    // f*(L (x) M) iso f*L (x) f*M on declared instances.
    for &((l, m), n) in &pairs {
        for f in site.morphisms() {
            if site.is_identity(f) || site.morphism(f).target != site.bundle(l).base {
                continue;
            }
            let (lp, mp, np) = match (
                site.pullbacks.get(&(f, l)),
                site.pullbacks.get(&(f, m)),
                site.pullbacks.get(&(f, n)),
            ) {
                (Some(&a), Some(&b), Some(&c)) => (a, b, c),
                _ => continue,
            };
            if let Ok(t) = site.tensor(lp, mp) {
                if t != site.canon(np) {
                    let line = site.pullback_lines.get(&(f, n)).copied().unwrap_or(0);
                    issue(
                        issues,
                        "tensor-pullback",
                        line,
                        format!(
                            "`{}`*(`{}` (x) `{}`) is not isomorphic to `{}`* `{}` (x) `{}`* `{}`",
                            site.morph_name(f),
                            site.bundle_name(l),
                            site.bundle_name(m),
                            site.morph_name(f),
                            site.bundle_name(l),
                            site.morph_name(f),
                            site.bundle_name(m)
                        ),
                    );
                }
            }
        }
    }
}

/// Zero-locus inclusions drop the relative dimension by exactly one along
/// every declared smooth structure map out of the bundle's base.
fn sections(site: &Site, issues: &mut Vec<Issue>) {
    for sec in &site.sections {
        let v = site.bundle(sec.bundle).base;
        let incl = site.morphism(sec.inclusion);
        if !incl.is_proper {
            issue(
                issues,
                "section-proper",
                sec.line,
                format!("section `{}`: inclusion `{}` must be proper", sec.name, incl.name),
            );
        }
        for pi in site.morphisms_from(v) {
            let pid = site.morphism(pi);
            if !pid.is_smooth || site.is_identity(pi) {
                continue;
            }
            if let Ok(comp) = site.compose(pi, sec.inclusion) {
                let cd = site.morphism(comp);
                let want = pid.rel_dim.unwrap_or(0) - 1;
                if !cd.is_smooth || cd.rel_dim != Some(want) {
                    issue(
                        issues,
                        "section-reldim",
                        sec.line,
                        format!(
                            "section `{}`: `{}`.`{}` must be smooth of reldim {}",
                            sec.name, pid.name, incl.name, want
                        ),
                    );
                }
            }
        }
    }
}

fn resolutions(site: &Site, issues: &mut Vec<Issue>) {
    for res in &site.resolutions {
        let md = site.morphism(res.map);
        if !md.is_proper {
            issue(
                issues,
                "resolution-proper",
                res.line,
                format!("resolution `{}` must be proper", res.name),
            );
        }
        if !site.object(md.source).is_smooth {
            issue(
                issues,
                "resolution-smooth-domain",
                res.line,
                format!(
                    "resolution `{}`: domain `{}` must be smooth",
                    res.name,
                    site.obj_name(md.source)
                ),
            );
        }
    }
    // The induced order on resolutions of each object must be transitive as
    // read off the declared refinement witnesses.
    let mut by_target: std::collections::BTreeMap<super::ObjId, Vec<MorphId>> = Default::default();
    for res in &site.resolutions {
        by_target
            .entry(site.morphism(res.map).target)
            .or_default()
            .push(res.map);
    }
    for (_, maps) in by_target {
        let le = |a: MorphId, b: MorphId| !site.refinement_witnesses(a, b).is_empty();
        for &a in &maps {
            for &b in &maps {
                for &c in &maps {
                    if le(a, b) && le(b, c) && !le(a, c) {
                        issue(
                            issues,
                            "resolution-order",
                            0,
                            format!(
                                "refinements `{}` <= `{}` <= `{}` lack a direct witness for `{}` <= `{}`",
                                site.morph_name(a),
                                site.morph_name(b),
                                site.morph_name(c),
                                site.morph_name(a),
                                site.morph_name(c)
                            ),
                        );
                    }
                }
            }
        }
    }
}
