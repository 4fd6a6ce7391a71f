//! Axiom conformance suites and the duality apparatus: the seven bivariant
//! compatibility axioms with units and commutativity, the over-category
//! package, grading laws, the cap product, resolution-dependent duality maps
//! and their transition coherence.
//!
//! Instances are enumerated exhaustively over generator pools built from the
//! site, in a fixed deterministic order, up to a sample budget. An instance
//! that needs an undeclared composite, square or pullback is recorded as
//! skipped with the missing declaration, never silently passed.

use std::collections::BTreeMap;

use crate::cycles::{
    self, chern, cycle_degree, external_product, product, pullback, pushforward, smooth_pullback,
    Cycle, Element,
};
use crate::site::{MorphId, ObjId, Site};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    /// Bundle-list cap for pool generators.
    pub bundle_cap: usize,
    /// Generators kept per theory arrow.
    pub max_gens_per_arrow: usize,
    /// Instance budget per axiom.
    pub max_instances: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            bundle_cap: 1,
            max_gens_per_arrow: 3,
            max_instances: 96,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub id: &'static str,
    pub checked: usize,
    pub nontrivial: usize,
    pub skipped: Vec<String>,
    pub violations: Vec<String>,
}

impl AxiomReport {
    fn new(id: &'static str) -> AxiomReport {
        AxiomReport {
            id,
            checked: 0,
            nontrivial: 0,
            skipped: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Suite<'a> {
    site: &'a Site,
    cfg: SuiteConfig,
    pools: BTreeMap<MorphId, Vec<Element>>,
}

impl<'a> Suite<'a> {
    fn new(site: &'a Site, cfg: SuiteConfig) -> Suite<'a> {
        let mut pools = BTreeMap::new();
        for arrow in site.morphisms() {
            let x = site.morphism(arrow).source;
            let mut gens: Vec<Cycle> = Vec::new();
            for h in site.morphisms_into(x) {
                let hd = site.morphism(h);
                if !hd.is_proper {
                    continue;
                }
                let smooth = site
                    .compose(arrow, h)
                    .map(|c| site.morphism(c).is_smooth)
                    .unwrap_or(false);
                if !smooth {
                    continue;
                }
                let pool = site.bundles_on(hd.source);
                for r in 0..=cfg.bundle_cap {
                    enumerate_multisets(&pool, r, &mut |bundles| {
                        gens.push(Cycle {
                            structure: h,
                            bundles: bundles.to_vec(),
                        });
                    });
                }
            }
            gens.sort();
            gens.truncate(cfg.max_gens_per_arrow);
            pools.insert(
                arrow,
                gens.into_iter()
                    .map(|c| Element::from_cycle(arrow, c))
                    .collect(),
            );
        }
        Suite { site, cfg, pools }
    }

    fn pool(&self, arrow: MorphId) -> &[Element] {
        self.pools.get(&arrow).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Runs one instance: `f` returns both sides; mismatch is a violation,
    /// a missing declaration (or an image outside the tables) is a skip.
    fn run(
        &self,
        report: &mut AxiomReport,
        nontrivial: bool,
        text: &str,
        f: impl FnOnce() -> Result<(Element, Element)>,
    ) {
        if report.checked + report.skipped.len() >= self.cfg.max_instances {
            return;
        }
        match f() {
            Ok((lhs, rhs)) => {
                report.checked += 1;
                if nontrivial {
                    report.nontrivial += 1;
                }
                if lhs != rhs {
                    report.violations.push(format!(
                        "{text}: lhs = {} over `{}`, rhs = {} over `{}`",
                        crate::expr::canonical_string(self.site, &lhs),
                        self.site.morph_name(lhs.arrow()),
                        crate::expr::canonical_string(self.site, &rhs),
                        self.site.morph_name(rhs.arrow())
                    ));
                }
            }
            Err(e) => report.skipped.push(format!("{text}: {e}")),
        }
    }

    fn nontrivial_pair(&self, arrows: &[MorphId], elements: &[&Element]) -> bool {
        let any_arrow = arrows.iter().any(|&m| !self.site.is_identity(m));
        let any_structure = elements.iter().any(|e| {
            e.terms()
                .any(|(c, _)| !self.site.is_identity(c.structure) || !c.bundles.is_empty())
        });
        any_arrow || any_structure
    }

    /// Declared non-identity squares, keyed in both orientations.
    fn squares(&self) -> Vec<(MorphId, MorphId)> {
        self.site.squares.keys().copied().collect()
    }

    fn composable_pairs(&self) -> Vec<(MorphId, MorphId)> {
        // (f, g) with target f = source g and g.f resolvable.
        let mut out = Vec::new();
        for f in self.site.morphisms() {
            for g in self.site.morphisms() {
                if self.site.morphism(f).target == self.site.morphism(g).source
                    && self.site.compose(g, f).is_ok()
                {
                    out.push((f, g));
                }
            }
        }
        out
    }
}

fn enumerate_multisets(
    pool: &[crate::site::BundleId],
    r: usize,
    f: &mut impl FnMut(&[crate::site::BundleId]),
) {
    fn go(
        pool: &[crate::site::BundleId],
        from: usize,
        left: usize,
        acc: &mut Vec<crate::site::BundleId>,
        f: &mut impl FnMut(&[crate::site::BundleId]),
    ) {
        if left == 0 {
            f(acc);
            return;
        }
        for i in from..pool.len() {
            acc.push(pool[i]);
            go(pool, i, left - 1, acc, f);
            acc.pop();
        }
    }
    go(pool, 0, r, &mut Vec::new(), f);
}

/// Runs the full axiom suite. Never fails: problems surface as skipped
/// instances or violations inside the reports.
pub fn run_axiom_suite(site: &Site, cfg: SuiteConfig) -> Vec<AxiomReport> {
    let suite = Suite::new(site, cfg);
    let mut out = Vec::new();
    out.push(axiom_a1(&suite));
    out.push(axiom_a2(&suite));
    out.push(axiom_a3(&suite));
    out.push(axiom_a12(&suite));
    out.push(axiom_a13(&suite));
    out.push(axiom_a23(&suite));
    out.push(axiom_a123(&suite));
    out.push(axiom_units(&suite));
    out.push(axiom_comm(&suite));
    out.extend(over_category_axioms(&suite));
    out.extend(grading_laws(&suite));
    out
}

fn axiom_a1(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A1");
    let pairs = s.composable_pairs();
    for &(f, g) in &pairs {
        for &(g2, h) in &pairs {
            if g2 != g {
                continue;
            }
            for a in s.pool(f) {
                for b in s.pool(g) {
                    for c in s.pool(h) {
                        let nontrivial = s.nontrivial_pair(&[f, g, h], &[a, b, c]);
                        s.run(
                            &mut rep,
                            nontrivial,
                            &format!(
                                "(a.b).c = a.(b.c) over {}, {}, {}",
                                s.site.morph_name(f),
                                s.site.morph_name(g),
                                s.site.morph_name(h)
                            ),
                            || {
                                let lhs = product(s.site, &product(s.site, a, b)?, c)?;
                                let rhs = product(s.site, a, &product(s.site, b, c)?)?;
                                Ok((lhs, rhs))
                            },
                        );
                    }
                }
            }
        }
    }
    rep
}

fn axiom_a2(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A2");
    let pairs = s.composable_pairs();
    for &(f, g) in &pairs {
        if !s.site.morphism(f).is_proper || !s.site.morphism(g).is_proper {
            continue;
        }
        let gf = match s.site.compose(g, f) {
            Ok(m) => m,
            Err(_) => continue,
        };
        for &(g2, h) in &pairs {
            if g2 != g {
                continue;
            }
            let hg = match s.site.compose(h, g) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let whole = match s.site.compose(h, gf) {
                Ok(m) => m,
                Err(_) => continue,
            };
            for a in s.pool(whole) {
                let nontrivial = s.nontrivial_pair(&[f, g], &[a]);
                s.run(
                    &mut rep,
                    nontrivial,
                    &format!(
                        "(g.f)_* = g_*.f_* for {}, {}",
                        s.site.morph_name(f),
                        s.site.morph_name(g)
                    ),
                    || {
                        let lhs = pushforward(s.site, gf, h, a)?;
                        let rhs = pushforward(s.site, g, h, &pushforward(s.site, f, hg, a)?)?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }
    rep
}

fn axiom_a3(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A3");
    for &(f, g) in &s.squares() {
        let sq1 = match s.site.pull_square(f, g) {
            Ok(sq) => sq,
            Err(_) => continue,
        };
        let f_pull = sq1.proj2;
        for &(f2, h) in &s.squares() {
            if f2 != f_pull {
                continue;
            }
            let gh = match s.site.compose(g, h) {
                Ok(m) => m,
                Err(_) => continue,
            };
            for a in s.pool(f) {
                let nontrivial = s.nontrivial_pair(&[g, h], &[a]);
                s.run(
                    &mut rep,
                    nontrivial,
                    &format!(
                        "(g.h)* = h*.g* for {}, {} against {}",
                        s.site.morph_name(g),
                        s.site.morph_name(h),
                        s.site.morph_name(f)
                    ),
                    || {
                        let lhs = pullback(s.site, gh, a)?;
                        let rhs = pullback(s.site, h, &pullback(s.site, g, a)?)?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }
    rep
}

fn axiom_a12(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A12");
    let pairs = s.composable_pairs();
    for &(f, g) in &pairs {
        if !s.site.morphism(f).is_proper {
            continue;
        }
        let gf = match s.site.compose(g, f) {
            Ok(m) => m,
            Err(_) => continue,
        };
        for h in s.site.morphisms() {
            if s.site.morphism(h).source != s.site.morphism(gf).target {
                continue;
            }
            let hg = match s.site.compose(h, g) {
                Ok(m) => m,
                Err(_) => continue,
            };
            for a in s.pool(gf) {
                for b in s.pool(h) {
                    let nontrivial = s.nontrivial_pair(&[f, g, h], &[a, b]);
                    s.run(
                        &mut rep,
                        nontrivial,
                        &format!(
                            "f_*(a.b) = f_*(a).b for {}, {}, {}",
                            s.site.morph_name(f),
                            s.site.morph_name(g),
                            s.site.morph_name(h)
                        ),
                        || {
                            let lhs = pushforward(s.site, f, hg, &product(s.site, a, b)?)?;
                            let rhs = product(s.site, &pushforward(s.site, f, g, a)?, b)?;
                            Ok((lhs, rhs))
                        },
                    );
                }
            }
        }
    }
    rep
}

fn axiom_a13(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A13");
    let squares = s.squares();
    for &(g, h) in &squares {
        let sq_gh = match s.site.pull_square(g, h) {
            Ok(sq) => sq,
            Err(_) => continue,
        };
        let h_pull = sq_gh.proj1; // h': Y' -> Y
        for &(f, h2) in &squares {
            if h2 != h_pull {
                continue;
            }
            if s.site.morphism(f).target != s.site.morphism(g).source {
                continue;
            }
            if s.site.compose(g, f).is_err() {
                continue;
            }
            for a in s.pool(f) {
                for b in s.pool(g) {
                    let nontrivial = s.nontrivial_pair(&[f, g, h], &[a, b]);
                    s.run(
                        &mut rep,
                        nontrivial,
                        &format!(
                            "h*(a.b) = h'*(a).h*(b) for {}, {}, {}",
                            s.site.morph_name(f),
                            s.site.morph_name(g),
                            s.site.morph_name(h)
                        ),
                        || {
                            let lhs = pullback(s.site, h, &product(s.site, a, b)?)?;
                            let rhs = product(
                                s.site,
                                &pullback(s.site, h_pull, a)?,
                                &pullback(s.site, h, b)?,
                            )?;
                            Ok((lhs, rhs))
                        },
                    );
                }
            }
        }
    }
    rep
}

fn axiom_a23(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A23");
    let squares = s.squares();
    for &(g, h) in &squares {
        let sq_gh = match s.site.pull_square(g, h) {
            Ok(sq) => sq,
            Err(_) => continue,
        };
        let h_pull = sq_gh.proj1; // h': Y' -> Y
        let g_pull = sq_gh.proj2; // g': Y' -> Z'
        for f in s.site.morphisms() {
            if !s.site.morphism(f).is_proper {
                continue;
            }
            if s.site.morphism(f).target != s.site.morphism(g).source {
                continue;
            }
            let gf = match s.site.compose(g, f) {
                Ok(m) => m,
                Err(_) => continue,
            };
            // f' is the pullback of f along h'.
            let sq_f = match s.site.pull_square(f, h_pull) {
                Ok(sq) => sq,
                Err(_) => continue,
            };
            let f_pull = sq_f.proj2;
            for a in s.pool(gf) {
                let nontrivial = s.nontrivial_pair(&[f, g, h], &[a]);
                s.run(
                    &mut rep,
                    nontrivial,
                    &format!(
                        "f'_*(h*(a)) = h*(f_*(a)) for {}, {}, {}",
                        s.site.morph_name(f),
                        s.site.morph_name(g),
                        s.site.morph_name(h)
                    ),
                    || {
                        let pulled = pullback(s.site, h, a)?;
                        let lhs = pushforward(s.site, f_pull, g_pull, &pulled)?;
                        let rhs = pullback(s.site, h, &pushforward(s.site, f, g, a)?)?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }
    rep
}

fn axiom_a123(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("A123");
    for &(f, g) in &s.squares() {
        if !s.site.morphism(g).is_proper {
            continue;
        }
        let sq = match s.site.pull_square(f, g) {
            Ok(sq) => sq,
            Err(_) => continue,
        };
        let g_pull = sq.proj1; // g': X' -> X
        for h in s.site.morphisms() {
            if s.site.morphism(h).source != s.site.morphism(f).target {
                continue;
            }
            let hg = match s.site.compose(h, g) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let hf = match s.site.compose(h, f) {
                Ok(m) => m,
                Err(_) => continue,
            };
            for a in s.pool(f) {
                for b in s.pool(hg) {
                    let nontrivial = s.nontrivial_pair(&[f, g, h], &[a, b]);
                    s.run(
                        &mut rep,
                        nontrivial,
                        &format!(
                            "g'_*(g*(a).b) = a.g_*(b) for {}, {}, {}",
                            s.site.morph_name(f),
                            s.site.morph_name(g),
                            s.site.morph_name(h)
                        ),
                        || {
                            let inner = product(s.site, &pullback(s.site, g, a)?, b)?;
                            let lhs = pushforward(s.site, g_pull, hf, &inner)?;
                            let rhs = product(s.site, a, &pushforward(s.site, g, h, b)?)?;
                            Ok((lhs, rhs))
                        },
                    );
                }
            }
        }
    }
    rep
}

fn axiom_units(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("Units");
    for x in s.site.objects() {
        let unit = Element::unit(s.site, x);
        // Right unit.
        for f in s.site.morphisms_into(x) {
            for a in s.pool(f) {
                let nontrivial = s.nontrivial_pair(&[f], &[a]);
                s.run(&mut rep, nontrivial, &format!("a.1_{} = a", s.site.obj_name(x)), || {
                    Ok((product(s.site, a, &unit)?, a.clone()))
                });
            }
        }
        // Left unit.
        for g in s.site.morphisms_from(x) {
            for b in s.pool(g) {
                let nontrivial = s.nontrivial_pair(&[g], &[b]);
                s.run(&mut rep, nontrivial, &format!("1_{}.b = b", s.site.obj_name(x)), || {
                    Ok((product(s.site, &unit, b)?, b.clone()))
                });
            }
        }
        // Pullback stability of units.
        for g in s.site.morphisms_into(x) {
            let x_prime = s.site.morphism(g).source;
            let nontrivial = !s.site.is_identity(g);
            s.run(
                &mut rep,
                nontrivial,
                &format!("g*(1_{}) = 1_{}", s.site.obj_name(x), s.site.obj_name(x_prime)),
                || Ok((pullback(s.site, g, &unit)?, Element::unit(s.site, x_prime))),
            );
        }
    }
    rep
}

fn axiom_comm(s: &Suite) -> AxiomReport {
    let mut rep = AxiomReport::new("Comm");
    for &(f, g) in &s.squares() {
        for a in s.pool(f) {
            for b in s.pool(g) {
                let nontrivial = s.nontrivial_pair(&[f, g], &[a, b]);
                s.run(
                    &mut rep,
                    nontrivial,
                    &format!(
                        "g*(a).b = f*(b).a for {}, {}",
                        s.site.morph_name(f),
                        s.site.morph_name(g)
                    ),
                    || {
                        let lhs = product(s.site, &pullback(s.site, g, a)?, b)?;
                        let rhs = product(s.site, &pullback(s.site, f, b)?, a)?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }
    rep
}

/// Over-category morphisms `f: X -> Y` over `base`: `pi_Y . f = pi_X`.
/// Returned as `(f, pi_X, pi_Y)`.
fn over_morphisms(site: &Site, base: ObjId) -> Vec<(MorphId, MorphId, MorphId)> {
    let mut out = Vec::new();
    for pi_y in site.morphisms_into(base) {
        let y = site.morphism(pi_y).source;
        for f in site.morphisms_into(y) {
            if let Ok(pi_x) = site.compose(pi_y, f) {
                out.push((f, pi_x, pi_y));
            }
        }
    }
    out
}

/// Resolves the product morphism `f x_S g` between declared corners: the
/// unique morphism making both projection squares commute.
fn resolve_product_morphism(
    site: &Site,
    corner1: crate::site::Square,
    corner2: crate::site::Square,
    f: MorphId,
    g: MorphId,
) -> Result<MorphId> {
    let c1 = site.morphism(corner1.proj1).source;
    let c2 = site.morphism(corner2.proj1).source;
    let want1 = site.compose(f, corner1.proj1)?;
    let want2 = site.compose(g, corner1.proj2)?;
    let mut found = Vec::new();
    for m in site.morphisms_from(c1) {
        if site.morphism(m).target != c2 {
            continue;
        }
        let ok1 = site.compose(corner2.proj1, m).map(|r| r == want1).unwrap_or(false);
        let ok2 = site.compose(corner2.proj2, m).map(|r| r == want2).unwrap_or(false);
        if ok1 && ok2 {
            found.push(m);
        }
    }
    match found.as_slice() {
        [m] => Ok(*m),
        [] => Err(Error::MissingDeclaration(format!(
            "a morphism `{} -> {}` commuting with both projections (the product of `{}` and `{}`)",
            site.obj_name(c1),
            site.obj_name(c2),
            site.morph_name(f),
            site.morph_name(g)
        ))),
        _ => Err(Error::InvalidInput(format!(
            "several morphisms `{} -> {}` commute with both projections",
            site.obj_name(c1),
            site.obj_name(c2)
        ))),
    }
}

fn over_category_axioms(s: &Suite) -> Vec<AxiomReport> {
    let mut d4_unit = AxiomReport::new("D4-unit");
    let mut d4_comm = AxiomReport::new("D4-comm");
    let mut d4_assoc = AxiomReport::new("D4-assoc");
    let mut oc_a1 = AxiomReport::new("OC-A1");
    let mut oc_a2 = AxiomReport::new("OC-A2");
    let mut oc_a3 = AxiomReport::new("OC-A3");
    let mut oc_a4 = AxiomReport::new("OC-A4");
    let mut oc_a5 = AxiomReport::new("OC-A5");
    let mut oc_a6 = AxiomReport::new("OC-A6");
    let mut oc_a7 = AxiomReport::new("OC-A7");
    let mut oc_a8 = AxiomReport::new("OC-A8");

    for base in s.site.objects() {
        let overs = over_morphisms(s.site, base);
        let arrows: Vec<MorphId> = {
            let mut v: Vec<MorphId> = s.site.morphisms_into(base);
            v.sort();
            v
        };
        let unit = Element::unit(s.site, base);

        // D4: unit, commutativity, associativity of the external product.
        for &pi in &arrows {
            for a in s.pool(pi) {
                let nontrivial = s.nontrivial_pair(&[pi], &[a]);
                s.run(&mut d4_unit, nontrivial, "a x_S 1_S = a", || {
                    Ok((external_product(s.site, a, &unit)?, a.clone()))
                });
            }
        }
        for &pi_x in &arrows {
            for &pi_y in &arrows {
                for a in s.pool(pi_x) {
                    for b in s.pool(pi_y) {
                        let nontrivial = s.nontrivial_pair(&[pi_x, pi_y], &[a, b]);
                        s.run(&mut d4_comm, nontrivial, "a x_S b = b x_S a", || {
                            Ok((
                                external_product(s.site, a, b)?,
                                external_product(s.site, b, a)?,
                            ))
                        });
                    }
                }
            }
        }
        for &pi_x in &arrows {
            for &pi_y in &arrows {
                for &pi_z in &arrows {
                    for a in s.pool(pi_x) {
                        for b in s.pool(pi_y) {
                            for c in s.pool(pi_z) {
                                let nontrivial = s.nontrivial_pair(&[pi_x, pi_y, pi_z], &[a, b, c]);
                                s.run(&mut d4_assoc, nontrivial, "(a x b) x c = a x (b x c)", || {
                                    let lhs = external_product(
                                        s.site,
                                        &external_product(s.site, a, b)?,
                                        c,
                                    )?;
                                    let rhs = external_product(
                                        s.site,
                                        a,
                                        &external_product(s.site, b, c)?,
                                    )?;
                                    Ok((lhs, rhs))
                                });
                            }
                        }
                    }
                }
            }
        }

        // OC-A1: functoriality of the smooth pullback.
        for &(f, _pi_x, pi_y) in &overs {
            if !s.site.morphism(f).is_smooth {
                continue;
            }
            for &(g, pi_y2, pi_z) in &overs {
                if pi_y2 != pi_y || !s.site.morphism(g).is_smooth {
                    continue;
                }
                let gf = match s.site.compose(g, f) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                for a in s.pool(pi_z) {
                    let nontrivial = s.nontrivial_pair(&[f, g], &[a]);
                    s.run(&mut oc_a1, nontrivial, "(g.f)* = f*.g* (smooth pullback)", || {
                        let lhs = smooth_pullback(s.site, gf, a)?;
                        let rhs = smooth_pullback(s.site, f, &smooth_pullback(s.site, g, a)?)?;
                        Ok((lhs, rhs))
                    });
                }
            }
        }

        // OC-A2: proper pushforward against smooth pullback over a square.
        for &(f, pi_x, pi_z) in &overs {
            if !s.site.morphism(f).is_proper {
                continue;
            }
            for &(g, pi_y, pi_z2) in &overs {
                if pi_z2 != pi_z || !s.site.morphism(g).is_smooth {
                    continue;
                }
                let sq = match s.site.pull_square(f, g) {
                    Ok(sq) => sq,
                    Err(_) => continue,
                };
                let g_pull = sq.proj1; // W -> X
                let f_pull = sq.proj2; // W -> Y
                for a in s.pool(pi_x) {
                    let nontrivial = s.nontrivial_pair(&[f, g], &[a]);
                    s.run(&mut oc_a2, nontrivial, "g*.f_* = f'_*.g'* (base change)", || {
                        let lhs = smooth_pullback(s.site, g, &pushforward(s.site, f, pi_z, a)?)?;
                        let rhs =
                            pushforward(s.site, f_pull, pi_y, &smooth_pullback(s.site, g_pull, a)?)?;
                        Ok((lhs, rhs))
                    });
                }
            }
        }

        // OC-A3 / OC-A4 / OC-A5: the Chern operator against the other maps.
        for &(f, pi_x, pi_y) in &overs {
            let y = s.site.morphism(pi_y).source;
            for m in s.site.bundles_on(y) {
                if s.site.morphism(f).is_proper {
                    for a in s.pool(pi_x) {
                        let nontrivial = s.nontrivial_pair(&[f], &[a]);
                        s.run(&mut oc_a3, nontrivial, "f_*.c1(f*M) = c1(M).f_*", || {
                            let fm = s.site.pullback_bundle(f, m)?;
                            let lhs = pushforward(s.site, f, pi_y, &chern(s.site, fm, a)?)?;
                            let rhs = chern(s.site, m, &pushforward(s.site, f, pi_y, a)?)?;
                            Ok((lhs, rhs))
                        });
                    }
                }
                if s.site.morphism(f).is_smooth {
                    for b in s.pool(pi_y) {
                        let nontrivial = s.nontrivial_pair(&[f], &[b]);
                        s.run(&mut oc_a4, nontrivial, "c1(f*M).f* = f*.c1(M)", || {
                            let fm = s.site.pullback_bundle(f, m)?;
                            let lhs = chern(s.site, fm, &smooth_pullback(s.site, f, b)?)?;
                            let rhs = smooth_pullback(s.site, f, &chern(s.site, m, b)?)?;
                            Ok((lhs, rhs))
                        });
                    }
                }
            }
        }
        for &pi in &arrows {
            let x = s.site.morphism(pi).source;
            let bundles = s.site.bundles_on(x);
            for &l in &bundles {
                for &l2 in &bundles {
                    for a in s.pool(pi) {
                        let nontrivial = s.nontrivial_pair(&[pi], &[a]);
                        s.run(&mut oc_a5, nontrivial, "c1(L).c1(L') = c1(L').c1(L)", || {
                            let lhs = chern(s.site, l, &chern(s.site, l2, a)?)?;
                            let rhs = chern(s.site, l2, &chern(s.site, l, a)?)?;
                            Ok((lhs, rhs))
                        });
                    }
                }
            }
        }

        // OC-A6 / OC-A7: external product against pushforward and pullback.
        for &(f, pi_x1, pi_x2) in &overs {
            for &(g, pi_y1, pi_y2) in &overs {
                let sq1 = match s.site.pull_square(pi_x1, pi_y1) {
                    Ok(sq) => sq,
                    Err(_) => continue,
                };
                let sq2 = match s.site.pull_square(pi_x2, pi_y2) {
                    Ok(sq) => sq,
                    Err(_) => continue,
                };
                let fg = match resolve_product_morphism(s.site, sq1, sq2, f, g) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                let corner_arrow_2 = match s.site.compose(pi_y2, sq2.proj2) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                if s.site.morphism(f).is_proper && s.site.morphism(g).is_proper {
                    for a in s.pool(pi_x1) {
                        for b in s.pool(pi_y1) {
                            let nontrivial = s.nontrivial_pair(&[f, g], &[a, b]);
                            s.run(&mut oc_a6, nontrivial, "f_*a x g_*b = (fxg)_*(a x b)", || {
                                let lhs = external_product(
                                    s.site,
                                    &pushforward(s.site, f, pi_x2, a)?,
                                    &pushforward(s.site, g, pi_y2, b)?,
                                )?;
                                let rhs = pushforward(
                                    s.site,
                                    fg,
                                    corner_arrow_2,
                                    &external_product(s.site, a, b)?,
                                )?;
                                Ok((lhs, rhs))
                            });
                        }
                    }
                }
                if s.site.morphism(f).is_smooth && s.site.morphism(g).is_smooth {
                    for a in s.pool(pi_x2) {
                        for b in s.pool(pi_y2) {
                            let nontrivial = s.nontrivial_pair(&[f, g], &[a, b]);
                            s.run(&mut oc_a7, nontrivial, "f*a x g*b = (fxg)*(a x b)", || {
                                let lhs = external_product(
                                    s.site,
                                    &smooth_pullback(s.site, f, a)?,
                                    &smooth_pullback(s.site, g, b)?,
                                )?;
                                let rhs =
                                    smooth_pullback(s.site, fg, &external_product(s.site, a, b)?)?;
                                Ok((lhs, rhs))
                            });
                        }
                    }
                }
            }
        }

        // OC-A8: the Chern operator slides across the external product
        // through the first projection.
        for &pi_x in &arrows {
            for &pi_y in &arrows {
                let sq = match s.site.pull_square(pi_x, pi_y) {
                    Ok(sq) => sq,
                    Err(_) => continue,
                };
                let p1 = sq.proj1;
                let x = s.site.morphism(pi_x).source;
                for l in s.site.bundles_on(x) {
                    for a in s.pool(pi_x) {
                        for b in s.pool(pi_y) {
                            let nontrivial = s.nontrivial_pair(&[pi_x, pi_y], &[a, b]);
                            s.run(&mut oc_a8, nontrivial, "c1(L)(a) x b = c1(p1*L)(a x b)", || {
                                let lhs =
                                    external_product(s.site, &chern(s.site, l, a)?, b)?;
                                let pl = s.site.pullback_bundle(p1, l)?;
                                let rhs = chern(s.site, pl, &external_product(s.site, a, b)?)?;
                                Ok((lhs, rhs))
                            });
                        }
                    }
                }
            }
        }
    }

    vec![
        d4_unit, d4_comm, d4_assoc, oc_a1, oc_a2, oc_a3, oc_a4, oc_a5, oc_a6, oc_a7, oc_a8,
    ]
}

/// Degree bookkeeping: product adds degrees, pushforward and bivariant
/// pullback preserve them, the Chern operator adds one, smooth pullback
/// subtracts the relative dimension.
fn grading_laws(s: &Suite) -> Vec<AxiomReport> {
    let mut prod = AxiomReport::new("grading-product");
    let mut push = AxiomReport::new("grading-pushforward");
    let mut pull = AxiomReport::new("grading-pullback");
    let mut chrn = AxiomReport::new("grading-chern");
    let mut smooth = AxiomReport::new("grading-smooth-pullback");

    let check_degrees = |rep: &mut AxiomReport,
                         text: &str,
                         nontrivial: bool,
                         budget: usize,
                         f: &dyn Fn() -> Result<(Element, Vec<i64>)>| {
        if rep.checked + rep.skipped.len() >= budget {
            return;
        }
        match f() {
            Ok((result, expected)) => {
                rep.checked += 1;
                if nontrivial {
                    rep.nontrivial += 1;
                }
                let got = result.degrees(s.site).unwrap_or_default();
                let want: Vec<i64> = {
                    let mut w = expected;
                    w.sort();
                    w.dedup();
                    w
                };
                // A zero result has no degrees; that is fine.
                if !result.is_zero() && got != want {
                    rep.violations
                        .push(format!("{text}: degrees {got:?}, expected {want:?}"));
                }
            }
            Err(e) => rep.skipped.push(format!("{text}: {e}")),
        }
    };

    let budget = s.cfg.max_instances;
    for (f, g) in s.composable_pairs() {
        for a in s.pool(f) {
            for b in s.pool(g) {
                let adeg = a.degrees(s.site).unwrap_or_default();
                let bdeg = b.degrees(s.site).unwrap_or_default();
                if adeg.len() != 1 || bdeg.len() != 1 {
                    continue;
                }
                check_degrees(
                    &mut prod,
                    "deg(a.b) = deg a + deg b",
                    s.nontrivial_pair(&[f, g], &[a, b]),
                    budget,
                    &|| Ok((product(s.site, a, b)?, vec![adeg[0] + bdeg[0]])),
                );
            }
        }
    }
    for (f, g) in s.composable_pairs() {
        if !s.site.morphism(f).is_proper {
            continue;
        }
        let gf = match s.site.compose(g, f) {
            Ok(m) => m,
            Err(_) => continue,
        };
        for a in s.pool(gf) {
            let adeg = a.degrees(s.site).unwrap_or_default();
            check_degrees(
                &mut push,
                "pushforward preserves degree",
                s.nontrivial_pair(&[f], &[a]),
                budget,
                &|| Ok((pushforward(s.site, f, g, a)?, adeg.clone())),
            );
        }
    }
    for &(f, g) in &s.squares() {
        for a in s.pool(f) {
            let adeg = a.degrees(s.site).unwrap_or_default();
            check_degrees(
                &mut pull,
                "bivariant pullback preserves degree",
                s.nontrivial_pair(&[g], &[a]),
                budget,
                &|| Ok((pullback(s.site, g, a)?, adeg.clone())),
            );
        }
    }
    for arrow in s.site.morphisms() {
        let x = s.site.morphism(arrow).source;
        for l in s.site.bundles_on(x) {
            for a in s.pool(arrow) {
                let adeg = a.degrees(s.site).unwrap_or_default();
                check_degrees(
                    &mut chrn,
                    "chern raises degree by one",
                    true,
                    budget,
                    &|| {
                        Ok((
                            chern(s.site, l, a)?,
                            adeg.iter().map(|d| d + 1).collect(),
                        ))
                    },
                );
            }
        }
    }
    for base in s.site.objects() {
        for (f, _pi_x, pi_y) in over_morphisms(s.site, base) {
            let fd = s.site.morphism(f);
            if !fd.is_smooth {
                continue;
            }
            let drop = fd.rel_dim.unwrap_or(0);
            for a in s.pool(pi_y) {
                let adeg = a.degrees(s.site).unwrap_or_default();
                check_degrees(
                    &mut smooth,
                    "smooth pullback drops degree by reldim",
                    s.nontrivial_pair(&[f], &[a]),
                    budget,
                    &|| {
                        Ok((
                            smooth_pullback(s.site, f, a)?,
                            adeg.iter().map(|d| d - drop).collect(),
                        ))
                    },
                );
            }
        }
    }
    vec![prod, push, pull, chrn, smooth]
}

/// Cap product `a /\ b` of `a` over `id_X` with a bundle-free `b` over a
/// theory arrow out of `X`: on generators
/// `[V ->h X; L*] /\ [W ->k X] = [V x_X W -> X; p1* L*]`.
pub fn cap_product(site: &Site, a: &Element, b: &Element) -> Result<Element> {
    if !site.is_identity(a.arrow()) {
        return Err(Error::InvalidInput(
            "cap product: the first argument must live over an identity arrow".to_string(),
        ));
    }
    let x = site.morphism(a.arrow()).source;
    if site.morphism(b.arrow()).source != x {
        return Err(Error::ArrowMismatch(
            "cap product: the second argument must live over an arrow out of the same object"
                .to_string(),
        ));
    }
    let mut out = Element::zero(b.arrow());
    for (cb, nb) in b.terms() {
        if !cb.bundles.is_empty() {
            return Err(Error::InvalidInput(format!(
                "cap product: {} carries bundles; the pairing is defined against bundle-free cycles",
                cb.display(site)
            )));
        }
        for (ca, na) in a.terms() {
            let sq = site.pull_square(ca.structure, cb.structure)?;
            let p1 = sq.proj1; // corner -> V
            let structure = site.compose(ca.structure, p1)?;
            let mut bundles = Vec::with_capacity(ca.bundles.len());
            for &l in &ca.bundles {
                bundles.push(site.pullback_bundle(p1, l)?);
            }
            let (cycle, _) = cycles::make_cycle(site, structure, b.arrow(), &bundles)?;
            out.add_term(cycle, na * nb);
        }
    }
    Ok(out)
}

/// Duality against a resolution `pi: Xt -> X`: `a /\ [Xt ->pi X]` over
/// `base_arrow: X -> S`. With `pi = id` on a smooth object this is the map
/// that returns the input representative.
pub fn duality_d_pi(
    site: &Site,
    pi: MorphId,
    base_arrow: MorphId,
    a: &Element,
) -> Result<Element> {
    let (cycle, _) = cycles::make_cycle(site, pi, base_arrow, &[])?;
    let beta = Element::from_cycle(base_arrow, cycle);
    cap_product(site, a, &beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compare {
    Le,
    Ge,
    IncomparableWithDeclaredBound,
    Incomparable,
}

impl Compare {
    pub fn name(self) -> &'static str {
        match self {
            Compare::Le => "<=",
            Compare::Ge => ">=",
            Compare::IncomparableWithDeclaredBound => "incomparable-with-declared-bound",
            Compare::Incomparable => "incomparable",
        }
    }
}

/// The declared resolutions of one object, ordered by refinement.
#[derive(Debug, Clone)]
pub struct ResolutionSystem {
    pub object: ObjId,
    pub resolutions: Vec<MorphId>,
}

impl ResolutionSystem {
    /// Declared resolutions with target `object`; a smooth object always has
    /// its identity available as a resolution.
    pub fn for_object(site: &Site, object: ObjId) -> ResolutionSystem {
        let mut resolutions: Vec<MorphId> = site
            .resolutions()
            .iter()
            .map(|r| r.map)
            .filter(|&m| site.morphism(m).target == object)
            .collect();
        if site.object(object).is_smooth {
            resolutions.push(site.identity(object));
        }
        resolutions.sort();
        resolutions.dedup();
        ResolutionSystem {
            object,
            resolutions,
        }
    }

    /// Decides the refinement order from declared witnesses only.
    pub fn compare(&self, site: &Site, p1: MorphId, p2: MorphId) -> Compare {
        let le = !site.refinement_witnesses(p1, p2).is_empty();
        let ge = !site.refinement_witnesses(p2, p1).is_empty();
        if le {
            return Compare::Le;
        }
        if ge {
            return Compare::Ge;
        }
        for &p3 in &self.resolutions {
            if !site.refinement_witnesses(p1, p3).is_empty()
                && !site.refinement_witnesses(p2, p3).is_empty()
            {
                return Compare::IncomparableWithDeclaredBound;
            }
        }
        Compare::Incomparable
    }
}

/// The full pairwise comparison table of a resolution system, in resolution
/// order.
pub fn resolution_compare_all(
    site: &Site,
    sys: &ResolutionSystem,
) -> Vec<(MorphId, MorphId, Compare)> {
    let mut out = Vec::new();
    for &p1 in &sys.resolutions {
        for &p2 in &sys.resolutions {
            out.push((p1, p2, sys.compare(site, p1, p2)));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TransitionReport {
    pub pairs: usize,
    pub instances: usize,
    pub violations: Vec<String>,
}

/// Checks `phi_{p1 p2} . D_{p1} = D_{p2}` for every declared related pair
/// and every element of `alphas`, computing the transition through every
/// declared refinement witness and reporting any disagreement.
pub fn transition_coherence(
    site: &Site,
    sys: &ResolutionSystem,
    base_arrow: MorphId,
    alphas: &[Element],
) -> Result<TransitionReport> {
    let mut report = TransitionReport {
        pairs: 0,
        instances: 0,
        violations: Vec::new(),
    };
    for &p1 in &sys.resolutions {
        for &p2 in &sys.resolutions {
            if p1 == p2 {
                continue;
            }
            let witnesses = site.refinement_witnesses(p1, p2);
            if witnesses.is_empty() {
                continue;
            }
            report.pairs += 1;
            for alpha in alphas {
                let d1 = duality_d_pi(site, p1, base_arrow, alpha)?;
                let d2 = duality_d_pi(site, p2, base_arrow, alpha)?;
                let _ = d1;
                for &w in &witnesses {
                    let composed = site.compose(p1, w)?;
                    let via = duality_d_pi(site, composed, base_arrow, alpha)?;
                    report.instances += 1;
                    if via != d2 {
                        report.violations.push(format!(
                            "transition through `{}` disagrees with capping against `{}`",
                            site.morph_name(w),
                            site.morph_name(p2)
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SpecializationReport {
    pub generators: usize,
    pub violations: Vec<String>,
}

/// Over a point base the engine's generators must match the classical
/// description: proper structure maps from sources that are smooth over the
/// point, graded by `-i + r = dim V`.
pub fn specialization_check(
    site: &Site,
    arrow: MorphId,
    universe: &crate::quotient::Universe,
) -> Result<SpecializationReport> {
    let base = site.morphism(arrow).target;
    if site.object(base).dim != 0 {
        return Err(Error::InvalidInput(format!(
            "specialization check needs a zero-dimensional base, `{}` has dim {}",
            site.obj_name(base),
            site.object(base).dim
        )));
    }
    let mut report = SpecializationReport {
        generators: universe.len(),
        violations: Vec::new(),
    };
    let x = site.morphism(arrow).source;
    // Route B: the classical generator set, enumerated from the smooth flag
    // and the declared smooth structure maps to the point.
    let mut classical: Vec<Cycle> = Vec::new();
    for h in site.morphisms_into(x) {
        let hd = site.morphism(h);
        if !hd.is_proper || !site.object(hd.source).is_smooth {
            continue;
        }
        let comp = match site.compose(arrow, h) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !site.morphism(comp).is_smooth {
            continue;
        }
        let pool = site.bundles_on(hd.source);
        for r in 0..=universe.r_max {
            enumerate_multisets(&pool, r, &mut |bundles| {
                classical.push(Cycle {
                    structure: h,
                    bundles: bundles.to_vec(),
                });
            });
        }
    }
    classical.sort();
    if classical != universe.cycles() {
        report
            .violations
            .push("generator sets of the two descriptions differ".to_string());
    }
    for (idx, cycle) in universe.cycles().iter().enumerate() {
        let i = universe.degree(idx);
        let r = cycle.r() as i64;
        let dim_v = site.object(cycle.source(site)).dim as i64;
        if -i + r != dim_v {
            report.violations.push(format!(
                "{}: -({i}) + {r} != dim V = {dim_v}",
                cycle.display(site)
            ));
        }
        let check = cycle_degree(site, cycle, arrow)?;
        if check != i {
            report
                .violations
                .push(format!("{}: inconsistent degree bookkeeping", cycle.display(site)));
        }
    }
    Ok(report)
}
