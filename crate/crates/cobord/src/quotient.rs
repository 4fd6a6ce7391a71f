//! Universes, the relation subgroups for the relative dimension, section and
//! formal-group-law axioms, and the stagewise quotient presentations.
//!
//! A [`Universe`] is the finite list of all valid normalized cycles over one
//! theory arrow with at most `r_max` bundles. On its coordinates the three
//! relation subgroups are assembled as integer lattices (tensored with the
//! truncated Lazard ring at the last stage), kept in Hermite normal form per
//! degree. Class equality is lattice membership of the difference; ranks are
//! `#generators - lattice rank` per degree.
//!
//! The enumerators use exactly the declared factorizations, section data and
//! tensor pairs, plus the two factorizations through identities that always
//! exist. The computed subgroup is therefore a sub-approximation of the
//! scheme-theoretic one; reports carry a note saying so.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cycles::{cycle_degree, Cycle, Element};
use crate::intmat::{smith_invariants, Lattice};
use crate::lazard::{LElement, LazardRing, Mono, Poly, TruncatedSeries};
use crate::site::{BundleId, MorphId, Site};
use crate::{cycles, Error, Result};

/// Finite enumeration of all valid cycles over `arrow` with at most `r_max`
/// bundles, in canonical order.
#[derive(Debug, Clone)]
pub struct Universe {
    pub arrow: MorphId,
    pub r_max: usize,
    cycles: Vec<Cycle>,
    index: BTreeMap<Cycle, usize>,
    degrees: Vec<i64>,
}

impl Universe {
    pub fn build(site: &Site, arrow: MorphId, r_max: usize, limit: usize) -> Result<Universe> {
        let x = site.morphism(arrow).source;
        let mut cycles = Vec::new();
        for h in site.morphisms_into(x) {
            let hd = site.morphism(h);
            if !hd.is_proper {
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
            for r in 0..=r_max {
                multisets(&pool, r, &mut |bundles| {
                    cycles.push(Cycle {
                        structure: h,
                        bundles: bundles.to_vec(),
                    });
                });
                if cycles.len() > limit {
                    return Err(Error::ResourceExceeded(format!(
                        "universe over `{}` exceeds the resource limit {limit}",
                        site.morph_name(arrow)
                    )));
                }
            }
        }
        cycles.sort();
        let index = cycles
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let degrees = cycles
            .iter()
            .map(|c| cycle_degree(site, c, arrow))
            .collect::<Result<Vec<_>>>()?;
        Ok(Universe {
            arrow,
            r_max,
            cycles,
            index,
            degrees,
        })
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn degree(&self, idx: usize) -> i64 {
        self.degrees[idx]
    }

    pub fn position(&self, cycle: &Cycle) -> Option<usize> {
        self.index.get(cycle).copied()
    }

    pub fn require(&self, site: &Site, cycle: &Cycle) -> Result<usize> {
        self.position(cycle).ok_or_else(|| {
            Error::UniverseOverflow(format!(
                "cycle {} is outside the universe over `{}` (r_max = {})",
                cycle.display(site),
                site.morph_name(self.arrow),
                self.r_max
            ))
        })
    }

    pub fn element_of(&self, idx: usize) -> Element {
        Element::from_cycle(self.arrow, self.cycles[idx].clone())
    }
}

/// Sorted multisets of size `r` over an ascending pool.
fn multisets(pool: &[BundleId], r: usize, f: &mut impl FnMut(&[BundleId])) {
    fn go(pool: &[BundleId], from: usize, left: usize, acc: &mut Vec<BundleId>, f: &mut impl FnMut(&[BundleId])) {
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
    let mut acc = Vec::with_capacity(r);
    go(pool, 0, r, &mut acc, f);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Free,
    Dim,
    Sect,
    Fgl,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Free => "free",
            Stage::Dim => "dim",
            Stage::Sect => "sect",
            Stage::Fgl => "fgl",
        }
    }
}

/// One enumerated relation generator.
#[derive(Debug, Clone)]
pub enum RelGen {
    /// A single universe cycle matching the relative-dimension pattern.
    DimCycle { cycle: usize },
    /// `[V -> X; ..L..] - [Z -> X; i*(..)]` for a declared section of `L`.
    SectDiff {
        plus: usize,
        minus: usize,
        section: usize,
    },
    /// `[c; F(L,M)] - [c; L (x) M]` with Lazard coefficients; terms are
    /// `(coefficient, universe index)`.
    FglDiff {
        cycle: usize,
        pair: (BundleId, BundleId),
        terms: Vec<(Poly, usize)>,
    },
}

#[derive(Debug, Clone)]
pub struct RelationSubgroup {
    pub stage: Stage,
    pub gens: Vec<RelGen>,
}

impl RelationSubgroup {
    /// Materializes the integer-coefficient generators (`Dim` and `Sect`
    /// stages) as elements.
    pub fn elements(&self, universe: &Universe) -> Vec<Element> {
        let mut out = Vec::new();
        for gen in &self.gens {
            match gen {
                RelGen::DimCycle { cycle } => out.push(universe.element_of(*cycle)),
                RelGen::SectDiff { plus, minus, .. } => {
                    let e = cycles::sub(&universe.element_of(*plus), &universe.element_of(*minus))
                        .expect("same arrow");
                    out.push(e);
                }
                RelGen::FglDiff { .. } => {}
            }
        }
        out
    }
}

/// Does `cycle` match the relative-dimension pattern? True iff some declared
/// smooth factorization `arrow . h = nu . pi` has strictly more than
/// `reldim nu` bundle instances recognized as `pi`-pullbacks.
fn dim_member(site: &Site, arrow: MorphId, cycle: &Cycle) -> Result<bool> {
    let comp = site.compose(arrow, cycle.structure)?;
    for (pi, nu) in site.smooth_factorizations(comp) {
        let threshold = site.rel_dim(nu).unwrap_or(0);
        if (cycle.r() as i64) <= threshold {
            continue;
        }
        let sprime = site.morphism(pi).target;
        let mut image: Vec<BundleId> = site
            .bundles_on(sprime)
            .into_iter()
            .filter_map(|l| site.pullback_bundle(pi, l).ok())
            .collect();
        image.sort();
        image.dedup();
        let recognized = cycle
            .bundles
            .iter()
            .filter(|b| image.binary_search(b).is_ok())
            .count();
        if recognized as i64 > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All universe cycles lying in the relative-dimension subgroup.
pub fn enumerate_rdim(site: &Site, universe: &Universe) -> Result<RelationSubgroup> {
    let mut gens = Vec::new();
    for (idx, cycle) in universe.cycles().iter().enumerate() {
        if dim_member(site, universe.arrow, cycle)? {
            gens.push(RelGen::DimCycle { cycle: idx });
        }
    }
    Ok(RelationSubgroup {
        stage: Stage::Dim,
        gens,
    })
}

/// All section differences within the universe: for every declared section
/// datum `(L, Z, i)` and every cycle containing the class of `L`, the
/// difference with the zero-locus cycle carrying the `i`-pullbacks of the
/// remaining bundles.
pub fn enumerate_rsect(site: &Site, universe: &Universe) -> Result<RelationSubgroup> {
    let mut gens = Vec::new();
    for (sidx, sec) in site.sections().iter().enumerate() {
        let l = site.canon(sec.bundle);
        let v = site.bundle(l).base;
        for (idx, cycle) in universe.cycles().iter().enumerate() {
            if cycle.source(site) != v || !cycle.bundles.contains(&l) {
                continue;
            }
            let structure = site.compose(cycle.structure, sec.inclusion)?;
            let mut rest = cycle.bundles.clone();
            let pos = rest.iter().position(|&b| b == l).expect("contains");
            rest.remove(pos);
            let mut pulled = Vec::with_capacity(rest.len());
            for b in rest {
                pulled.push(site.pullback_bundle(sec.inclusion, b)?);
            }
            let (minus_cycle, _) = cycles::make_cycle(site, structure, universe.arrow, &pulled)?;
            let minus = universe.require(site, &minus_cycle)?;
            if minus != idx {
                gens.push(RelGen::SectDiff {
                    plus: idx,
                    minus,
                    section: sidx,
                });
            }
        }
    }
    Ok(RelationSubgroup {
        stage: Stage::Sect,
        gens,
    })
}

/// All formal-group-law differences within the universe: for every declared
/// tensor pair `{L, M} -> T` and every universe cycle on their base object,
/// `sum F_ij [c + iL + jM] - [c + T]`.
///
/// Series terms beyond the truncation must be certified dead by the relative
/// dimension axiom (`BoundTooSmall` otherwise); terms that would exceed the
/// bundle cap are dropped when dead and raise `UniverseOverflow` when not.
pub fn enumerate_rfgl(
    site: &Site,
    universe: &Universe,
    ring: &LazardRing,
    f: &TruncatedSeries,
) -> Result<RelationSubgroup> {
    let mut gens = Vec::new();
    let n = ring.bound();
    for (l, m, t) in site.tensor_pairs() {
        let base = site.bundle(l).base;
        for (idx, cycle) in universe.cycles().iter().enumerate() {
            if cycle.source(site) != base {
                continue;
            }
            let comp = site.compose(universe.arrow, cycle.structure)?;
            let d = site.rel_dim(comp).unwrap_or(0);
            let r = cycle.r() as i64;
            if (n as i64) < d - r {
                return Err(Error::BoundTooSmall(format!(
                    "cycle {} needs the formal group law through degree {}, built through {}",
                    cycle.display(site),
                    d - r,
                    n
                )));
            }
            let mut terms: Vec<(Poly, usize)> = Vec::new();
            let mut push_term = |poly: Poly, target: &Cycle| -> Result<()> {
                let pos = universe.require(site, target)?;
                terms.push((poly, pos));
                Ok(())
            };
            for (&(i, j), coeff) in f.coeffs() {
                if i + j == 0 {
                    continue;
                }
                let extended = r + i as i64 + j as i64;
                let mut bundles = cycle.bundles.clone();
                bundles.extend(std::iter::repeat_n(l, i as usize));
                bundles.extend(std::iter::repeat_n(m, j as usize));
                bundles.sort();
                let target = Cycle {
                    structure: cycle.structure,
                    bundles,
                };
                if extended > universe.r_max as i64 {
                    if extended > d {
                        // Dead by the relative dimension axiom; dropping it
                        // changes nothing at this stage.
                        continue;
                    }
                    return Err(Error::UniverseOverflow(format!(
                        "term {} of a formal-group-law generator exceeds r_max = {}",
                        target.display(site),
                        universe.r_max
                    )));
                }
                push_term(coeff.clone(), &target)?;
            }
            // The tensor side.
            let mut bundles = cycle.bundles.clone();
            bundles.push(t);
            bundles.sort();
            let target = Cycle {
                structure: cycle.structure,
                bundles,
            };
            if r + 1 > universe.r_max as i64 {
                if r + 1 > d {
                    // Both sides dead; the whole generator reduces to terms
                    // already present, so record what remains only if any.
                } else {
                    return Err(Error::UniverseOverflow(format!(
                        "tensor term {} of a formal-group-law generator exceeds r_max = {}",
                        target.display(site),
                        universe.r_max
                    )));
                }
            } else {
                push_term(Poly::constant(BigInt::from(-1)), &target)?;
            }
            if !terms.is_empty() {
                gens.push(RelGen::FglDiff {
                    cycle: idx,
                    pair: (l, m),
                    terms,
                });
            }
        }
    }
    Ok(RelationSubgroup {
        stage: Stage::Fgl,
        gens,
    })
}

/// One graded block of a presentation: coordinates `(monomial, cycle)` of a
/// fixed degree `deg cycle - deg monomial`, with the accumulated relation
/// lattice in normal form.
#[derive(Debug, Clone)]
struct Block {
    coords: Vec<(Mono, usize)>,
    index: BTreeMap<(Mono, usize), usize>,
    lattice: Lattice,
}

/// A stage-tagged quotient presentation over a universe.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub stage: Stage,
    pub universe: Universe,
    blocks: BTreeMap<i64, Block>,
    subgroups: Vec<RelationSubgroup>,
}

impl Presentation {
    /// Builds the presentation at `stage`, enumerating the prerequisite
    /// subgroups in order. The Lazard data is required at the FGL stage.
    pub fn build(
        site: &Site,
        universe: Universe,
        stage: Stage,
        lazard: Option<(&LazardRing, &TruncatedSeries)>,
        limit: usize,
    ) -> Result<Presentation> {
        let mut subgroups = Vec::new();
        if stage >= Stage::Dim {
            subgroups.push(enumerate_rdim(site, &universe)?);
        }
        if stage >= Stage::Sect {
            subgroups.push(enumerate_rsect(site, &universe)?);
        }
        if stage >= Stage::Fgl {
            let (ring, f) = lazard.ok_or_else(|| {
                Error::InvalidInput("the FGL stage needs a built Lazard truncation".to_string())
            })?;
            subgroups.push(enumerate_rfgl(site, &universe, ring, f)?);
        }

        // Coordinate grid: trivial monomial only below the FGL stage.
        let monos: Vec<Mono> = if stage >= Stage::Fgl {
            let (ring, _) = lazard.unwrap();
            let mut all = Vec::new();
            for d in 0..=ring.bound() {
                all.extend(ring.monomials(d).iter().cloned());
            }
            all
        } else {
            vec![Mono::one()]
        };

        let mut blocks: BTreeMap<i64, Block> = BTreeMap::new();
        for (cidx, _) in universe.cycles().iter().enumerate() {
            for m in &monos {
                let deg = universe.degree(cidx) - m.degree() as i64;
                let block = blocks.entry(deg).or_insert_with(|| Block {
                    coords: Vec::new(),
                    index: BTreeMap::new(),
                    lattice: Lattice::empty(0),
                });
                block.coords.push((m.clone(), cidx));
            }
        }
        let mut total = 0usize;
        for block in blocks.values_mut() {
            block.coords.sort();
            block.index = block
                .coords
                .iter()
                .enumerate()
                .map(|(i, c)| (c.clone(), i))
                .collect();
            block.lattice = Lattice::empty(block.coords.len());
            total += block.coords.len();
        }
        if total > limit {
            return Err(Error::ResourceExceeded(format!(
                "presentation has {total} coordinates, exceeding the resource limit {limit}"
            )));
        }

        let mut pres = Presentation {
            stage,
            universe,
            blocks,
            subgroups,
        };
        pres.fill_lattices(site, lazard, limit)?;
        Ok(pres)
    }

    fn insert_row(&mut self, degree: i64, row_terms: &[(Mono, usize, BigInt)]) {
        if row_terms.is_empty() {
            return;
        }
        let block = self.blocks.get_mut(&degree).expect("degree block");
        let mut v = vec![BigInt::zero(); block.coords.len()];
        for (m, c, n) in row_terms {
            let pos = block.index[&(m.clone(), *c)];
            v[pos] += n;
        }
        block.lattice.insert(v);
    }

    fn fill_lattices(
        &mut self,
        site: &Site,
        lazard: Option<(&LazardRing, &TruncatedSeries)>,
        limit: usize,
    ) -> Result<()> {
        let _ = site;
        let fgl = self.stage >= Stage::Fgl;
        let monos: Vec<Mono> = if fgl {
            let (ring, _) = lazard.unwrap();
            let mut all = Vec::new();
            for d in 0..=ring.bound() {
                all.extend(ring.monomials(d).iter().cloned());
            }
            all
        } else {
            vec![Mono::one()]
        };

        let mut rows = 0usize;
        let bump = |rows: &mut usize| -> Result<()> {
            *rows += 1;
            if *rows > limit {
                return Err(Error::ResourceExceeded(format!(
                    "relation rows exceed the resource limit {limit}"
                )));
            }
            Ok(())
        };

        // Lazard ring relations tensor every cycle.
        if fgl {
            let (ring, _) = lazard.unwrap();
            for d in 1..=ring.bound() {
                let basis = ring.monomials(d);
                let lattice_rows: Vec<Vec<BigInt>> =
                    ring.relation_lattice(d).basis().to_vec();
                for cidx in 0..self.universe.len() {
                    let cdeg = self.universe.degree(cidx);
                    for row in &lattice_rows {
                        let terms: Vec<(Mono, usize, BigInt)> = row
                            .iter()
                            .enumerate()
                            .filter(|(_, n)| !n.is_zero())
                            .map(|(i, n)| (basis[i].clone(), cidx, n.clone()))
                            .collect();
                        bump(&mut rows)?;
                        self.insert_row(cdeg - d as i64, &terms);
                    }
                }
            }
        }

        let subgroups = self.subgroups.clone();
        for sub in &subgroups {
            for gen in &sub.gens {
                match gen {
                    RelGen::DimCycle { cycle } => {
                        let cdeg = self.universe.degree(*cycle);
                        for m in &monos {
                            bump(&mut rows)?;
                            self.insert_row(
                                cdeg - m.degree() as i64,
                                &[(m.clone(), *cycle, BigInt::from(1))],
                            );
                        }
                    }
                    RelGen::SectDiff { plus, minus, .. } => {
                        let cdeg = self.universe.degree(*plus);
                        debug_assert_eq!(cdeg, self.universe.degree(*minus));
                        for m in &monos {
                            bump(&mut rows)?;
                            self.insert_row(
                                cdeg - m.degree() as i64,
                                &[
                                    (m.clone(), *plus, BigInt::from(1)),
                                    (m.clone(), *minus, BigInt::from(-1)),
                                ],
                            );
                        }
                    }
                    RelGen::FglDiff { terms, .. } => {
                        let (ring, _) = lazard.unwrap();
                        let gen_max = terms
                            .iter()
                            .map(|(p, _)| p.max_degree())
                            .max()
                            .unwrap_or(0);
                        // The generator's block degree: every term has equal
                        // cycle-degree minus coefficient-degree.
                        let base_deg = terms
                            .iter()
                            .flat_map(|(p, c)| {
                                p.terms().map(|(m, _)| {
                                    self.universe.degree(*c) - m.degree() as i64
                                })
                            })
                            .next()
                            .unwrap_or(0);
                        for m in &monos {
                            if m.degree() + gen_max > ring.bound() {
                                continue;
                            }
                            let mut row: Vec<(Mono, usize, BigInt)> = Vec::new();
                            for (p, cidx) in terms {
                                let scaled = ring.reduce(&p.mul(&Poly::from_mono(m.clone())));
                                for (mono, n) in scaled.terms() {
                                    row.push((mono.clone(), *cidx, n.clone()));
                                }
                            }
                            bump(&mut rows)?;
                            self.insert_row(base_deg - m.degree() as i64, &row);
                        }
                    }
                }
            }
        }
        for block in self.blocks.values_mut() {
            block.lattice.back_reduce();
        }
        Ok(())
    }

    pub fn subgroups(&self) -> &[RelationSubgroup] {
        &self.subgroups
    }

    /// Occurring degrees, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        self.blocks.keys().copied().collect()
    }

    /// Per-degree rank of the quotient: `#coordinates - lattice rank`.
    pub fn ranks(&self) -> BTreeMap<i64, usize> {
        self.blocks
            .iter()
            .map(|(&d, b)| (d, b.coords.len() - b.lattice.rank()))
            .collect()
    }

    /// Per-degree invariant factors of the relation lattice.
    pub fn invariant_factors(&self) -> BTreeMap<i64, Vec<BigInt>> {
        self.blocks
            .iter()
            .map(|(&d, b)| (d, smith_invariants(b.lattice.basis())))
            .collect()
    }

    fn coords_of_lelement(&self, site: &Site, e: &LElement) -> Result<BTreeMap<i64, Vec<BigInt>>> {
        if e.arrow() != self.universe.arrow {
            return Err(Error::ArrowMismatch(format!(
                "element lives over `{}`, presentation over `{}`",
                site.morph_name(e.arrow()),
                site.morph_name(self.universe.arrow)
            )));
        }
        let mut per_degree: BTreeMap<i64, Vec<BigInt>> = BTreeMap::new();
        for (cycle, poly) in e.terms() {
            let cidx = self.universe.require(site, cycle)?;
            let cdeg = self.universe.degree(cidx);
            for (m, n) in poly.terms() {
                if self.stage < Stage::Fgl && !m.is_one() {
                    return Err(Error::InvalidInput(
                        "Lazard coefficients need a FGL-stage presentation".to_string(),
                    ));
                }
                let deg = cdeg - m.degree() as i64;
                let block = self.blocks.get(&deg).ok_or_else(|| {
                    Error::UniverseOverflow(format!("no coordinates in degree {deg}"))
                })?;
                let v = per_degree
                    .entry(deg)
                    .or_insert_with(|| vec![BigInt::zero(); block.coords.len()]);
                let pos = *block.index.get(&(m.clone(), cidx)).ok_or_else(|| {
                    Error::UniverseOverflow(format!(
                        "coordinate for {} is outside the presentation",
                        cycle.display(site)
                    ))
                })?;
                v[pos] += n;
            }
        }
        Ok(per_degree)
    }

    /// Canonical representative coordinates of the class of `e`, degreewise.
    pub fn class_of_lz(
        &self,
        site: &Site,
        e: &LElement,
    ) -> Result<Vec<(i64, Mono, usize, BigInt)>> {
        let per_degree = self.coords_of_lelement(site, e)?;
        let mut out = Vec::new();
        for (deg, v) in per_degree {
            let block = &self.blocks[&deg];
            let reduced = block.lattice.reduce(v);
            for (i, n) in reduced.into_iter().enumerate() {
                if !n.is_zero() {
                    let (m, c) = block.coords[i].clone();
                    out.push((deg, m, c, n));
                }
            }
        }
        Ok(out)
    }

    pub fn class_of(&self, site: &Site, e: &Element) -> Result<Vec<(i64, Mono, usize, BigInt)>> {
        self.class_of_lz(site, &LElement::from_element(e))
    }

    pub fn is_zero_class(&self, site: &Site, e: &Element) -> Result<bool> {
        Ok(self.class_of(site, e)?.is_empty())
    }

    pub fn is_zero_class_lz(&self, site: &Site, e: &LElement) -> Result<bool> {
        Ok(self.class_of_lz(site, e)?.is_empty())
    }

    /// Coset equality, decided by normal-form reduction of the difference.
    pub fn equal_in_quotient(&self, site: &Site, a: &Element, b: &Element) -> Result<bool> {
        let diff = cycles::sub(a, b)?;
        self.is_zero_class(site, &diff)
    }

    pub fn equal_in_quotient_lz(&self, site: &Site, a: &LElement, b: &LElement) -> Result<bool> {
        let diff = a.sub(b)?;
        self.is_zero_class_lz(site, &diff)
    }
}

/// An operation whose compatibility with the relation subgroups is checked.
pub enum InducedOp<'a> {
    /// Proper pushforward along an over-category morphism into the target
    /// presentation's object.
    Pushforward(MorphId),
    /// Smooth pullback along an over-category morphism out of the target
    /// presentation's object.
    SmoothPullback(MorphId),
    /// The Chern operator of a bundle on the presentation's object.
    Chern(BundleId),
    /// External product against the free elements of another universe; the
    /// target presentation lives over the corner.
    External { other: &'a Universe },
}

impl InducedOp<'_> {
    pub fn describe(&self, site: &Site) -> String {
        match self {
            InducedOp::Pushforward(f) => format!("pushforward along `{}`", site.morph_name(*f)),
            InducedOp::SmoothPullback(f) => {
                format!("smooth pullback along `{}`", site.morph_name(*f))
            }
            InducedOp::Chern(l) => format!("chern `{}`", site.bundle_name(*l)),
            InducedOp::External { other } => format!(
                "external product against the universe over `{}`",
                site.morph_name(other.arrow)
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WellDefReport {
    pub op: String,
    pub stage: Stage,
    pub instances: usize,
    /// Instances whose image needs data outside the declared tables or the
    /// finite universe; the membership question is not posable there, so
    /// they are reported, never silently passed.
    pub skipped: Vec<String>,
    pub violations: Vec<String>,
}

/// Applies `op` to every relation generator of `src` (stages Dim and Sect)
/// and asserts that the image lies in the relation lattice of `tgt`.
pub fn check_welldefined(
    site: &Site,
    op: &InducedOp,
    src: &Presentation,
    tgt: &Presentation,
) -> Result<WellDefReport> {
    if src.stage > Stage::Sect || tgt.stage > Stage::Sect {
        return Err(Error::InvalidInput(
            "well-definedness checks run at the Dim and Sect stages".to_string(),
        ));
    }
    if src.stage != tgt.stage {
        return Err(Error::InvalidInput(
            "source and target presentations must be at the same stage".to_string(),
        ));
    }
    let mut gens: Vec<Element> = Vec::new();
    for sub in src.subgroups() {
        gens.extend(sub.elements(&src.universe));
    }
    let mut report = WellDefReport {
        op: op.describe(site),
        stage: src.stage,
        instances: 0,
        skipped: Vec::new(),
        violations: Vec::new(),
    };
    let check_image =
        |report: &mut WellDefReport, gen_text: String, image: Result<Element>| -> Result<()> {
            let image = match image {
                Ok(image) => image,
                // Not posable inside the declared data: skipped, reported.
                Err(Error::MissingDeclaration(msg)) | Err(Error::UniverseOverflow(msg)) => {
                    report.skipped.push(format!("{gen_text}: {msg}"));
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            if image.arrow() != tgt.universe.arrow {
                return Err(Error::ArrowMismatch(
                    "image lands over a different arrow than the target presentation".to_string(),
                ));
            }
            match tgt.is_zero_class(site, &image) {
                Ok(true) => {
                    report.instances += 1;
                }
                Ok(false) => {
                    report.instances += 1;
                    report.violations.push(format!(
                        "{gen_text}: image is not in the {} relation lattice",
                        tgt.stage.name()
                    ));
                }
                Err(Error::UniverseOverflow(msg)) => {
                    report.skipped.push(format!("{gen_text}: {msg}"));
                }
                Err(e) => return Err(e),
            }
            Ok(())
        };
    match op {
        InducedOp::Pushforward(f) => {
            for gen in &gens {
                let image = cycles::pushforward(site, *f, tgt.universe.arrow, gen);
                check_image(&mut report, describe_gen(site, gen), image)?;
            }
        }
        InducedOp::SmoothPullback(f) => {
            for gen in &gens {
                let image = cycles::smooth_pullback(site, *f, gen);
                check_image(&mut report, describe_gen(site, gen), image)?;
            }
        }
        InducedOp::Chern(l) => {
            for gen in &gens {
                let image = cycles::chern(site, *l, gen);
                check_image(&mut report, describe_gen(site, gen), image)?;
            }
        }
        InducedOp::External { other } => {
            for gen in &gens {
                for idx in 0..other.len() {
                    let free = other.element_of(idx);
                    let image = cycles::external_product(site, gen, &free);
                    let text = format!(
                        "{} x_S {}",
                        describe_gen(site, gen),
                        other.cycles()[idx].display(site)
                    );
                    check_image(&mut report, text, image)?;
                }
            }
        }
    }
    Ok(report)
}

fn describe_gen(site: &Site, gen: &Element) -> String {
    let mut parts = Vec::new();
    for (cycle, coeff) in gen.terms() {
        parts.push(format!("{}*{}", coeff, cycle.display(site)));
    }
    parts.join(" + ")
}
