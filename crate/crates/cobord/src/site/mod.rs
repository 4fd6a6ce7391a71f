//! The finitely presented geometric site: objects, flagged morphisms, a
//! composition table, fiber squares, line bundles with pullback/tensor/iso
//! tables, section data and resolutions.
//!
//! A site is immutable after loading; every query below is pure. Identity
//! morphisms, identity-shaped squares and identity bundle pullbacks are
//! synthesized on the fly, everything else must be declared. A lookup that
//! is well-typed but undeclared fails with `MissingDeclaration` naming the
//! entry to add.

mod parser;
mod validate;

use std::collections::BTreeMap;

use crate::error::Issue;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorphId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BundleId(pub usize);

#[derive(Debug, Clone)]
pub struct ObjData {
    pub name: String,
    pub dim: u32,
    pub is_smooth: bool,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct MorphData {
    pub name: String,
    pub source: ObjId,
    pub target: ObjId,
    pub is_proper: bool,
    pub is_smooth: bool,
    /// Present iff `is_smooth`; validated to equal `dim source - dim target`.
    pub rel_dim: Option<i64>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct BundleData {
    pub name: String,
    pub base: ObjId,
    pub line: usize,
}

/// A declared fiber square for the base pair `(f: X -> Z, g: Y -> Z)`.
/// `proj1: corner -> X` is the pullback of `g`, `proj2: corner -> Y` the
/// pullback of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Square {
    pub corner: ObjId,
    pub proj1: MorphId,
    pub proj2: MorphId,
}

#[derive(Debug, Clone)]
pub struct SectionData {
    pub name: String,
    pub bundle: BundleId,
    pub zero_locus: ObjId,
    pub inclusion: MorphId,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct ResolutionData {
    pub name: String,
    pub map: MorphId,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Site {
    pub(crate) objects: Vec<ObjData>,
    pub(crate) morphisms: Vec<MorphData>,
    pub(crate) bundles: Vec<BundleData>,
    pub(crate) obj_by_name: BTreeMap<String, ObjId>,
    pub(crate) morph_by_name: BTreeMap<String, MorphId>,
    pub(crate) bundle_by_name: BTreeMap<String, BundleId>,
    /// `(g, f) -> g . f` for declared composable pairs; identity absorption
    /// is handled in `compose` and never stored.
    pub(crate) composites: BTreeMap<(MorphId, MorphId), MorphId>,
    pub(crate) composite_lines: BTreeMap<(MorphId, MorphId), usize>,
    /// Key `(f, g)`; transposed keys are registered automatically.
    pub(crate) squares: BTreeMap<(MorphId, MorphId), Square>,
    pub(crate) square_lines: BTreeMap<(MorphId, MorphId), usize>,
    /// `(f, canonical bundle on target f) -> canonical bundle on source f`.
    pub(crate) pullbacks: BTreeMap<(MorphId, BundleId), BundleId>,
    pub(crate) pullback_lines: BTreeMap<(MorphId, BundleId), usize>,
    /// Unordered canonical pair -> canonical tensor product.
    pub(crate) tensors: BTreeMap<(BundleId, BundleId), BundleId>,
    pub(crate) tensor_lines: BTreeMap<(BundleId, BundleId), usize>,
    /// Per bundle: representative of its declared isomorphism class (the
    /// member with the smallest id).
    pub(crate) iso_canon: Vec<BundleId>,
    pub(crate) sections: Vec<SectionData>,
    pub(crate) resolutions: Vec<ResolutionData>,
    /// Auto-created identity morphism of each object.
    pub(crate) identities: Vec<MorphId>,
}

/// Parses and fully validates a site description.
pub fn load_site(text: &str) -> Result<Site> {
    let site = parser::parse(text)?;
    let issues = validate::validate(&site);
    if issues.is_empty() {
        Ok(site)
    } else {
        Err(Error::validation(issues))
    }
}

/// Parses a site without running invariant validation. Used to fault-inject
/// broken tables into the axiom suite; everything user-facing goes through
/// [`load_site`].
pub fn parse_site_unvalidated(text: &str) -> Result<Site> {
    parser::parse(text)
}

/// Runs invariant validation, returning all complaints.
pub fn validate_site(site: &Site) -> Vec<Issue> {
    validate::validate(site)
}

impl Site {
    pub fn objects(&self) -> impl Iterator<Item = ObjId> {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorphId> {
        (0..self.morphisms.len()).map(MorphId)
    }

    pub fn bundles(&self) -> impl Iterator<Item = BundleId> {
        (0..self.bundles.len()).map(BundleId)
    }

    pub fn object(&self, id: ObjId) -> &ObjData {
        &self.objects[id.0]
    }

    pub fn morphism(&self, id: MorphId) -> &MorphData {
        &self.morphisms[id.0]
    }

    pub fn bundle(&self, id: BundleId) -> &BundleData {
        &self.bundles[id.0]
    }

    pub fn object_named(&self, name: &str) -> Result<ObjId> {
        self.obj_by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown object `{name}`")))
    }

    pub fn morphism_named(&self, name: &str) -> Result<MorphId> {
        self.morph_by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown morphism `{name}`")))
    }

    pub fn bundle_named(&self, name: &str) -> Result<BundleId> {
        self.bundle_by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown bundle `{name}`")))
    }

    pub fn identity(&self, obj: ObjId) -> MorphId {
        self.identities[obj.0]
    }

    pub fn is_identity(&self, m: MorphId) -> bool {
        self.identities[self.morphisms[m.0].source.0] == m
    }

    pub fn obj_name(&self, id: ObjId) -> &str {
        &self.objects[id.0].name
    }

    pub fn morph_name(&self, id: MorphId) -> &str {
        &self.morphisms[id.0].name
    }

    pub fn bundle_name(&self, id: BundleId) -> &str {
        &self.bundles[id.0].name
    }

    pub fn rel_dim(&self, m: MorphId) -> Option<i64> {
        self.morphisms[m.0].rel_dim
    }

    pub fn sections(&self) -> &[SectionData] {
        &self.sections
    }

    pub fn resolutions(&self) -> &[ResolutionData] {
        &self.resolutions
    }

    /// `g . f` (apply `f` first). Identities absorb without a table entry.
    pub fn compose(&self, g: MorphId, f: MorphId) -> Result<MorphId> {
        let gd = self.morphism(g);
        let fd = self.morphism(f);
        if fd.target != gd.source {
            return Err(Error::NotComposable(format!(
                "target of `{}` is `{}` but source of `{}` is `{}`",
                fd.name,
                self.obj_name(fd.target),
                gd.name,
                self.obj_name(gd.source)
            )));
        }
        if self.is_identity(g) {
            return Ok(f);
        }
        if self.is_identity(f) {
            return Ok(g);
        }
        self.composites.get(&(g, f)).copied().ok_or_else(|| {
            Error::MissingDeclaration(format!(
                "composite `{}`.`{}` (add `composite {}.{} = <name>` under [composites])",
                gd.name, fd.name, gd.name, fd.name
            ))
        })
    }

    /// The declared fiber square over the base pair `(f, g)`; squares with an
    /// identity leg exist implicitly.
    pub fn pull_square(&self, f: MorphId, g: MorphId) -> Result<Square> {
        let fd = self.morphism(f);
        let gd = self.morphism(g);
        if fd.target != gd.target {
            return Err(Error::NotComposable(format!(
                "`{}` and `{}` do not share a target",
                fd.name, gd.name
            )));
        }
        if self.is_identity(g) {
            return Ok(Square {
                corner: fd.source,
                proj1: self.identity(fd.source),
                proj2: f,
            });
        }
        if self.is_identity(f) {
            return Ok(Square {
                corner: gd.source,
                proj1: g,
                proj2: self.identity(gd.source),
            });
        }
        self.squares.get(&(f, g)).copied().ok_or_else(|| {
            Error::MissingDeclaration(format!(
                "fiber square for (`{}`, `{}`) (add `square ({},{}) corner=... proj1=... proj2=...` under [squares])",
                fd.name, gd.name, fd.name, gd.name
            ))
        })
    }

    /// Representative of the declared isomorphism class of `b`.
    pub fn canon(&self, b: BundleId) -> BundleId {
        self.iso_canon[b.0]
    }

    /// Pullback of bundle `b` (on `target f`) along `f`; identity pullbacks
    /// are implicit. Both the key and the result are canonicalized.
    pub fn pullback_bundle(&self, f: MorphId, b: BundleId) -> Result<BundleId> {
        let fd = self.morphism(f);
        let bd = self.bundle(b);
        if bd.base != fd.target {
            return Err(Error::InvalidInput(format!(
                "bundle `{}` lives on `{}`, not on the target of `{}`",
                bd.name,
                self.obj_name(bd.base),
                fd.name
            )));
        }
        if self.is_identity(f) {
            return Ok(self.canon(b));
        }
        self.pullbacks
            .get(&(f, self.canon(b)))
            .map(|&r| self.canon(r))
            .ok_or_else(|| {
                Error::MissingDeclaration(format!(
                    "pullback of `{}` along `{}` (add `pullback {}* {} = <name>` under [pullbacks])",
                    bd.name, fd.name, fd.name, bd.name
                ))
            })
    }

    /// Declared tensor product; symmetric in its arguments.
    pub fn tensor(&self, l: BundleId, m: BundleId) -> Result<BundleId> {
        let lc = self.canon(l);
        let mc = self.canon(m);
        let key = (lc.min(mc), lc.max(mc));
        self.tensors.get(&key).map(|&r| self.canon(r)).ok_or_else(|| {
            Error::MissingDeclaration(format!(
                "tensor `{}` (x) `{}` (add `tensor {} (x) {} = <name> on {}` under [tensors])",
                self.bundle_name(l),
                self.bundle_name(m),
                self.bundle_name(l),
                self.bundle_name(m),
                self.obj_name(self.bundle(l).base)
            ))
        })
    }

    /// Declared unordered tensor pairs, with their canonical product.
    pub fn tensor_pairs(&self) -> Vec<(BundleId, BundleId, BundleId)> {
        self.tensors
            .iter()
            .map(|(&(l, m), &t)| (l, m, self.canon(t)))
            .collect()
    }

    /// Canonical representatives of the bundles living on `obj`, sorted.
    pub fn bundles_on(&self, obj: ObjId) -> Vec<BundleId> {
        let mut out: Vec<BundleId> = (0..self.bundles.len())
            .map(BundleId)
            .filter(|&b| self.bundles[b.0].base == obj)
            .map(|b| self.canon(b))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn morphisms_into(&self, obj: ObjId) -> Vec<MorphId> {
        (0..self.morphisms.len())
            .map(MorphId)
            .filter(|&m| self.morphisms[m.0].target == obj)
            .collect()
    }

    pub fn morphisms_from(&self, obj: ObjId) -> Vec<MorphId> {
        (0..self.morphisms.len())
            .map(MorphId)
            .filter(|&m| self.morphisms[m.0].source == obj)
            .collect()
    }

    /// All declared factorizations `c = nu . pi` with both legs smooth,
    /// including the implicit `(id, c)` and `(c, id)` when `c` is smooth.
    /// Returned as `(pi, nu)` pairs.
    pub fn smooth_factorizations(&self, c: MorphId) -> Vec<(MorphId, MorphId)> {
        let cd = self.morphism(c);
        let mut out = Vec::new();
        if cd.is_smooth {
            out.push((self.identity(cd.source), c));
            out.push((c, self.identity(cd.target)));
        }
        for (&(nu, pi), &comp) in &self.composites {
            if comp != c {
                continue;
            }
            if self.morphism(nu).is_smooth && self.morphism(pi).is_smooth {
                out.push((pi, nu));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Declared refinement witnesses `m` with `p1 . m = p2` (so `p1 <= p2`),
    /// including the identity when `p1 == p2`.
    pub fn refinement_witnesses(&self, p1: MorphId, p2: MorphId) -> Vec<MorphId> {
        let mut out = Vec::new();
        if p1 == p2 {
            out.push(self.identity(self.morphism(p1).source));
        }
        for (&(g, m), &comp) in &self.composites {
            if g == p1 && comp == p2 {
                out.push(m);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Short summary counts used by the CLI `validate` report.
    pub fn summary(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("objects", self.objects.len()),
            ("morphisms", self.morphisms.len()),
            ("composites", self.composites.len()),
            ("squares", self.square_lines.len()),
            ("bundles", self.bundles.len()),
            ("pullbacks", self.pullback_lines.len()),
            ("tensors", self.tensor_lines.len()),
            ("sections", self.sections.len()),
            ("resolutions", self.resolutions.len()),
        ]
    }
}
