//! The free graded abelian group on cobordism cycles over a theory arrow,
//! with the bivariant operations: product, pushforward, pullback, the Chern
//! operator, the external product over a base and smooth pullback.
//!
//! A cycle `[V ->h X; L1..Lr]` is stored in normalized form: each bundle is
//! replaced by the representative of its declared isomorphism class and the
//! list is sorted, so two cycles are equal exactly when they agree up to
//! bundle permutation and declared bundle isomorphism. The grading follows
//! `-i + r = reldim(arrow . h)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::site::{BundleId, MorphId, ObjId, Site};
use crate::{Error, Result};

/// A normalized cobordism cycle. The theory arrow is carried by the
/// containing [`Element`], not by the cycle itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    /// The proper structure morphism `h: V -> X`.
    pub structure: MorphId,
    /// Canonical bundle representatives on `V`, sorted.
    pub bundles: Vec<BundleId>,
}

impl Cycle {
    pub fn source(&self, site: &Site) -> ObjId {
        site.morphism(self.structure).source
    }

    pub fn r(&self) -> usize {
        self.bundles.len()
    }

    pub fn display<'a>(&'a self, site: &'a Site) -> CycleDisplay<'a> {
        CycleDisplay { cycle: self, site }
    }
}

pub struct CycleDisplay<'a> {
    cycle: &'a Cycle,
    site: &'a Site,
}

impl fmt::Display for CycleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let md = self.site.morphism(self.cycle.structure);
        write!(
            f,
            "[{} ->{} {}",
            self.site.obj_name(md.source),
            md.name,
            self.site.obj_name(md.target)
        )?;
        if !self.cycle.bundles.is_empty() {
            write!(f, "; ")?;
            for (i, b) in self.cycle.bundles.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.site.bundle_name(*b))?;
            }
        }
        write!(f, "]")
    }
}

/// Builds a normalized cycle over `arrow`, checking the definition: the
/// structure morphism is proper, the composite to the base is declared and
/// smooth, and every bundle lives on the cycle's source. Returns the cycle
/// together with its degree `i = r - reldim(arrow . h)`.
pub fn make_cycle(
    site: &Site,
    structure: MorphId,
    arrow: MorphId,
    bundles: &[BundleId],
) -> Result<(Cycle, i64)> {
    let hd = site.morphism(structure);
    if !hd.is_proper {
        return Err(Error::NotProper(format!(
            "structure morphism `{}` of a cobordism cycle must be proper",
            hd.name
        )));
    }
    let composite = site.compose(arrow, structure)?;
    let cd = site.morphism(composite);
    if !cd.is_smooth {
        return Err(Error::NotSmoothComposite(format!(
            "`{}`.`{}` = `{}` is not smooth",
            site.morph_name(arrow),
            hd.name,
            cd.name
        )));
    }
    let mut canon = Vec::with_capacity(bundles.len());
    for &b in bundles {
        if site.bundle(b).base != hd.source {
            return Err(Error::InvalidInput(format!(
                "bundle `{}` does not live on `{}`",
                site.bundle_name(b),
                site.obj_name(hd.source)
            )));
        }
        canon.push(site.canon(b));
    }
    canon.sort();
    let cycle = Cycle {
        structure,
        bundles: canon,
    };
    let degree = cycle.r() as i64 - cd.rel_dim.unwrap_or(0);
    Ok((cycle, degree))
}

/// Degree of an already-normalized cycle over `arrow`.
pub fn cycle_degree(site: &Site, cycle: &Cycle, arrow: MorphId) -> Result<i64> {
    let composite = site.compose(arrow, cycle.structure)?;
    let rd = site
        .rel_dim(composite)
        .ok_or_else(|| Error::NotSmoothComposite(site.morph_name(composite).to_string()))?;
    Ok(cycle.r() as i64 - rd)
}

/// A finite integer linear combination of normalized cycles sharing one
/// theory arrow. The zero element is the empty combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    arrow: MorphId,
    terms: BTreeMap<Cycle, BigInt>,
}

impl Element {
    pub fn zero(arrow: MorphId) -> Element {
        Element {
            arrow,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_cycle(arrow: MorphId, cycle: Cycle) -> Element {
        let mut terms = BTreeMap::new();
        terms.insert(cycle, BigInt::from(1));
        Element { arrow, terms }
    }

    /// The unit generator `[X ->id X]` over the identity arrow of `obj`.
    pub fn unit(site: &Site, obj: ObjId) -> Element {
        let id = site.identity(obj);
        Element::from_cycle(
            id,
            Cycle {
                structure: id,
                bundles: Vec::new(),
            },
        )
    }

    /// The fundamental class `[X ->id X]` over `arrow: X -> S`, defined when
    /// `arrow` itself is smooth; this is the pullback of the base unit.
    pub fn fundamental_class(site: &Site, arrow: MorphId) -> Result<Element> {
        let x = site.morphism(arrow).source;
        let (cycle, _) = make_cycle(site, site.identity(x), arrow, &[])?;
        Ok(Element::from_cycle(arrow, cycle))
    }

    pub fn arrow(&self) -> MorphId {
        self.arrow
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Cycle, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, cycle: &Cycle) -> BigInt {
        self.terms.get(cycle).cloned().unwrap_or_else(BigInt::zero)
    }

    pub(crate) fn add_term(&mut self, cycle: Cycle, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(cycle).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            // Cheap to look up again; keeps the map free of zeros.
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Restriction to the homogeneous piece of the given degree.
    pub fn homogeneous(&self, site: &Site, degree: i64) -> Result<Element> {
        let mut out = Element::zero(self.arrow);
        for (cycle, coeff) in &self.terms {
            if cycle_degree(site, cycle, self.arrow)? == degree {
                out.add_term(cycle.clone(), coeff.clone());
            }
        }
        Ok(out)
    }

    /// Degrees of the terms, sorted and deduplicated.
    pub fn degrees(&self, site: &Site) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        for cycle in self.terms.keys() {
            out.push(cycle_degree(site, cycle, self.arrow)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

pub fn add(a: &Element, b: &Element) -> Result<Element> {
    if a.arrow != b.arrow {
        return Err(Error::ArrowMismatch(
            "cannot add elements over different theory arrows".to_string(),
        ));
    }
    let mut out = a.clone();
    for (cycle, coeff) in &b.terms {
        out.add_term(cycle.clone(), coeff.clone());
    }
    Ok(out)
}

pub fn scale(n: &BigInt, a: &Element) -> Element {
    let mut out = Element::zero(a.arrow);
    for (cycle, coeff) in &a.terms {
        out.add_term(cycle.clone(), coeff * n);
    }
    out
}

pub fn sub(a: &Element, b: &Element) -> Result<Element> {
    add(a, &scale(&BigInt::from(-1), b))
}

/// Bivariant product. `a` lives over `f: X -> Y`, `b` over `g: Y -> Z`; the
/// result lives over `g . f`. On generators
/// `[V ->h X; L*] . [W ->k Y; M*] = [V' -> X; k''*L*, (f'.h')*M*]`,
/// where `X'` is the declared corner of `(f, k)` with projections
/// `k': X' -> X`, `f': X' -> W`, and `V'` the corner of `(h, k')` with
/// projections `k'': V' -> V`, `h': V' -> X'`.
pub fn product(site: &Site, a: &Element, b: &Element) -> Result<Element> {
    let f = a.arrow;
    let g = b.arrow;
    let gf = site.compose(g, f)?;
    let mut out = Element::zero(gf);
    for (ca, na) in &a.terms {
        for (cb, nb) in &b.terms {
            let k = cb.structure;
            let outer = site.pull_square(f, k)?;
            let k_pull = outer.proj1; // k': X' -> X
            let f_pull = outer.proj2; // f': X' -> W
            let inner = site.pull_square(ca.structure, k_pull)?;
            let k_pp = inner.proj1; // k'': V' -> V
            let h_pull = inner.proj2; // h': V' -> X'
            let structure = site.compose(ca.structure, k_pp)?;
            let mut bundles = Vec::with_capacity(ca.bundles.len() + cb.bundles.len());
            for &l in &ca.bundles {
                bundles.push(site.pullback_bundle(k_pp, l)?);
            }
            for &m in &cb.bundles {
                let on_corner = site.pullback_bundle(f_pull, m)?;
                bundles.push(site.pullback_bundle(h_pull, on_corner)?);
            }
            let (cycle, _) = make_cycle(site, structure, gf, &bundles)?;
            out.add_term(cycle, na * nb);
        }
    }
    Ok(out)
}

/// Bivariant pushforward along a proper `f`: relabels `[V ->h X; L*]` as
/// `[V ->f.h Y; L*]`. The element must live over the declared composite
/// `g . f`; the result lives over `g`.
pub fn pushforward(site: &Site, f: MorphId, g: MorphId, a: &Element) -> Result<Element> {
    let fd = site.morphism(f);
    if !fd.is_proper {
        return Err(Error::NotProper(format!(
            "pushforward needs `{}` proper",
            fd.name
        )));
    }
    let gf = site.compose(g, f)?;
    if gf != a.arrow {
        return Err(Error::ArrowMismatch(format!(
            "element lives over `{}`, not over `{}`.`{}`",
            site.morph_name(a.arrow),
            site.morph_name(g),
            fd.name
        )));
    }
    let mut out = Element::zero(g);
    for (cycle, coeff) in &a.terms {
        let structure = site.compose(f, cycle.structure)?;
        let (new_cycle, _) = make_cycle(site, structure, g, &cycle.bundles)?;
        out.add_term(new_cycle, coeff.clone());
    }
    Ok(out)
}

/// Bivariant pullback of `a` (over `f: X -> Y`) along `g: Y' -> Y`, against
/// the declared square for `(f, g)`. On generators
/// `g*[V ->h X; L*] = [V' ->h' X'; g''* L*]`.
pub fn pullback(site: &Site, g: MorphId, a: &Element) -> Result<Element> {
    let f = a.arrow;
    let outer = site.pull_square(f, g)?;
    let g_pull = outer.proj1; // g': X' -> X
    let f_pull = outer.proj2; // f': X' -> Y'
    let mut out = Element::zero(f_pull);
    for (cycle, coeff) in &a.terms {
        let inner = site.pull_square(cycle.structure, g_pull)?;
        let g_pp = inner.proj1; // g'': V' -> V
        let h_pull = inner.proj2; // h': V' -> X'
        let mut bundles = Vec::with_capacity(cycle.bundles.len());
        for &l in &cycle.bundles {
            bundles.push(site.pullback_bundle(g_pp, l)?);
        }
        let (new_cycle, _) = make_cycle(site, h_pull, f_pull, &bundles)?;
        out.add_term(new_cycle, coeff.clone());
    }
    Ok(out)
}

/// The Chern operator of a bundle on the source of the theory arrow:
/// appends `h* L` to every generator and raises the degree by one.
pub fn chern(site: &Site, l: BundleId, a: &Element) -> Result<Element> {
    let x = site.morphism(a.arrow).source;
    if site.bundle(l).base != x {
        return Err(Error::InvalidInput(format!(
            "Chern operator: bundle `{}` does not live on `{}`",
            site.bundle_name(l),
            site.obj_name(x)
        )));
    }
    let mut out = Element::zero(a.arrow);
    for (cycle, coeff) in &a.terms {
        let pulled = site.pullback_bundle(cycle.structure, l)?;
        let mut bundles = cycle.bundles.clone();
        bundles.push(pulled);
        bundles.sort();
        out.add_term(
            Cycle {
                structure: cycle.structure,
                bundles,
            },
            coeff.clone(),
        );
    }
    Ok(out)
}

/// Iterated Chern operator.
pub fn chern_power(site: &Site, l: BundleId, n: usize, a: &Element) -> Result<Element> {
    let mut out = a.clone();
    for _ in 0..n {
        out = chern(site, l, &out)?;
    }
    Ok(out)
}

/// External product over the shared base: for `a` over `pi_X: X -> S` and
/// `b` over `pi_Y: Y -> S` this is `pi_Y^*(a) . b`, living over the declared
/// structure morphism of the corner `X x_S Y`.
pub fn external_product(site: &Site, a: &Element, b: &Element) -> Result<Element> {
    let pi_x = a.arrow;
    let pi_y = b.arrow;
    if site.morphism(pi_x).target != site.morphism(pi_y).target {
        return Err(Error::ArrowMismatch(
            "external product needs both elements over the same base".to_string(),
        ));
    }
    let pulled = pullback(site, pi_y, a)?;
    product(site, &pulled, b)
}

/// Over-category smooth pullback along `f: X -> Y` over `S`: sends `a` over
/// `pi_Y` to an element over `pi_X = pi_Y . f`, dropping the degree by
/// `reldim f`. On generators `[W ->k Y; M*] -> [W' ->k' X; f'* M*]` with
/// `(W', k', f')` the declared square for `(f, k)`.
pub fn smooth_pullback(site: &Site, f: MorphId, a: &Element) -> Result<Element> {
    let fd = site.morphism(f);
    if !fd.is_smooth {
        return Err(Error::NotSmooth(format!(
            "smooth pullback needs `{}` smooth",
            fd.name
        )));
    }
    let pi_x = site.compose(a.arrow, f)?;
    let mut out = Element::zero(pi_x);
    for (cycle, coeff) in &a.terms {
        let sq = site.pull_square(f, cycle.structure)?;
        let k_pull = sq.proj1; // k': W' -> X
        let f_pull = sq.proj2; // f': W' -> W
        let mut bundles = Vec::with_capacity(cycle.bundles.len());
        for &m in &cycle.bundles {
            bundles.push(site.pullback_bundle(f_pull, m)?);
        }
        let (new_cycle, _) = make_cycle(site, k_pull, pi_x, &bundles)?;
        out.add_term(new_cycle, coeff.clone());
    }
    Ok(out)
}
