//! The Lazard ring truncated at a total series degree bound, with the
//! universal formal group law `F(u,v) = u + v + sum a_ij u^i v^j`.
//!
//! Generators `a_ij` (`i, j >= 1`, `i + j <= N + 1`) carry homological
//! degree `i + j - 1`. The relation ideal is generated by commutativity
//! `a_ij - a_ji` together with the coefficients of the associativity
//! residual `F(F(u,v),w) - F(u,F(v,w))` through total series degree `N`;
//! its degree-by-degree lattice is kept in Hermite normal form, so reduction
//! of ring elements is canonical and idempotent. Unitality `F(u,0) = u`
//! holds by construction since no `a_i0` generators exist.
//!
//! Graded ranks of degree `k` are stable for every bound `N >= k + 1`; the
//! degree-`N` piece of a bound-`N` truncation only sees the commutativity
//! relations and is reported as provisional.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cycles::{chern_power, Cycle, Element};
use crate::intmat::Lattice;
use crate::site::{BundleId, MorphId, Site};
use crate::{Error, Result};

/// A monomial in the truncation's generators: sorted `(generator, exponent)`
/// pairs with positive exponents. Ordered by (degree, exponent vector), so
/// canonical forms and printed tables are deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    exps: Vec<(usize, u32)>,
    degree: u32,
}

impl Mono {
    pub fn one() -> Mono {
        Mono {
            exps: Vec::new(),
            degree: 0,
        }
    }

    pub fn generator(ring: &LazardRing, gen: usize) -> Mono {
        Mono {
            exps: vec![(gen, 1)],
            degree: ring.gen_degree(gen),
        }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut map: BTreeMap<usize, u32> = self.exps.iter().copied().collect();
        for &(g, e) in &other.exps {
            *map.entry(g).or_insert(0) += e;
        }
        Mono {
            exps: map.into_iter().collect(),
            degree: self.degree + other.degree,
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

/// An integer polynomial in the truncation's generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, BigInt>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Mono::one(), c);
        p
    }

    pub fn from_mono(m: Mono) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Mono, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly::zero().sub(self)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, n: &BigInt) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * n);
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Splits into homogeneous components, keyed by degree.
    fn by_degree(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree()).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn display<'a>(&'a self, ring: &'a LazardRing) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, ring }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    ring: &'a LazardRing,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.poly.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
                continue;
            }
            if !c.is_one() {
                write!(f, "{c}*")?;
            }
            for (k, &(g, e)) in m.exps.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                let (i, j) = self.ring.gens[g];
                if e == 1 {
                    write!(f, "a{i}{j}")?;
                } else {
                    write!(f, "a{i}{j}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// The Lazard ring truncated at series degree `bound`, with its per-degree
/// relation lattices in normal form.
#[derive(Debug, Clone)]
pub struct LazardRing {
    bound: u32,
    /// Generators `(i, j)` sorted by `(i + j, i)`.
    gens: Vec<(u32, u32)>,
    gen_index: BTreeMap<(u32, u32), usize>,
    /// Monomial basis per homological degree `0..=bound`.
    monos: Vec<Vec<Mono>>,
    mono_index: Vec<BTreeMap<Mono, usize>>,
    /// Relation ideal lattice per degree.
    lattices: Vec<Lattice>,
}

/// The two-variable truncated series housing the formal group law:
/// coefficients for `u^p v^q` with `p + q <= bound`, including the unit
/// coefficients at `(1,0)` and `(0,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    bound: u32,
    coeffs: BTreeMap<(u32, u32), Poly>,
}

impl TruncatedSeries {
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn coeff(&self, p: u32, q: u32) -> Poly {
        self.coeffs.get(&(p, q)).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(u32, u32), &Poly)> {
        self.coeffs.iter()
    }

    pub fn set_coeff(&mut self, p: u32, q: u32, c: Poly) {
        if c.is_zero() {
            self.coeffs.remove(&(p, q));
        } else {
            self.coeffs.insert((p, q), c);
        }
    }
}

impl LazardRing {
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn gens(&self) -> &[(u32, u32)] {
        &self.gens
    }

    pub fn gen_degree(&self, g: usize) -> u32 {
        let (i, j) = self.gens[g];
        i + j - 1
    }

    pub fn generator(&self, i: u32, j: u32) -> Option<usize> {
        self.gen_index.get(&(i, j)).copied()
    }

    pub fn monomials(&self, degree: u32) -> &[Mono] {
        &self.monos[degree as usize]
    }

    pub fn relation_lattice(&self, degree: u32) -> &Lattice {
        &self.lattices[degree as usize]
    }

    /// Rank of the degree-`k` graded piece: monomials minus relation rank.
    pub fn graded_rank(&self, degree: u32) -> usize {
        self.monos[degree as usize].len() - self.lattices[degree as usize].rank()
    }

    /// Canonical form of a polynomial modulo the relation ideal, computed
    /// degreewise against the HNF lattices. Panics if a component exceeds
    /// the truncation bound; callers filter degrees first.
    pub fn reduce(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (deg, comp) in p.by_degree() {
            assert!(
                deg <= self.bound,
                "polynomial degree {deg} exceeds the truncation bound {}",
                self.bound
            );
            let basis = &self.monos[deg as usize];
            let index = &self.mono_index[deg as usize];
            let mut v = vec![BigInt::zero(); basis.len()];
            for (m, c) in comp.terms() {
                v[index[m]] = c.clone();
            }
            let v = self.lattices[deg as usize].reduce(v);
            for (i, c) in v.into_iter().enumerate() {
                out.add_term(basis[i].clone(), c);
            }
        }
        out
    }

    /// Converts a homogeneous polynomial into coordinates over the degree's
    /// monomial basis.
    pub fn coords(&self, degree: u32, p: &Poly) -> Vec<BigInt> {
        let basis = &self.monos[degree as usize];
        let index = &self.mono_index[degree as usize];
        let mut v = vec![BigInt::zero(); basis.len()];
        for (m, c) in p.terms() {
            assert_eq!(m.degree(), degree, "non-homogeneous coordinate request");
            v[index[m]] = c.clone();
        }
        v
    }
}

/// Enumerates monomials of the given degree over `gens` (by index) with
/// degrees `deg[g]`, in the canonical order.
fn monomials_of_degree(degrees: &[u32], degree: u32) -> Vec<Mono> {
    fn go(
        degrees: &[u32],
        g: usize,
        remaining: u32,
        acc: &mut Vec<(usize, u32)>,
        out: &mut Vec<Mono>,
        total: u32,
    ) {
        if remaining == 0 {
            out.push(Mono {
                exps: acc.clone(),
                degree: total,
            });
            return;
        }
        if g >= degrees.len() {
            return;
        }
        go(degrees, g + 1, remaining, acc, out, total);
        let d = degrees[g];
        if d > 0 {
            for e in 1..=remaining / d {
                acc.push((g, e));
                go(degrees, g + 1, remaining - d * e, acc, out, total);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut acc = Vec::new();
    go(degrees, 0, degree, &mut acc, &mut out, degree);
    out.sort();
    out
}

/// A three-variable truncated series with `Poly` coefficients; used only to
/// expand the associativity residual.
#[derive(Debug, Clone, Default)]
struct Ser3 {
    bound: u32,
    coeffs: BTreeMap<(u32, u32, u32), Poly>,
}

impl Ser3 {
    fn zero(bound: u32) -> Ser3 {
        Ser3 {
            bound,
            coeffs: BTreeMap::new(),
        }
    }

    fn var(bound: u32, which: usize) -> Ser3 {
        let mut s = Ser3::zero(bound);
        let e = match which {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            _ => (0, 0, 1),
        };
        s.add(e, Poly::one());
        s
    }

    fn add(&mut self, e: (u32, u32, u32), c: Poly) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(e).or_default();
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    fn plus(&self, other: &Ser3) -> Ser3 {
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            out.add(e, c.clone());
        }
        out
    }

    fn minus(&self, other: &Ser3) -> Ser3 {
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            out.add(e, c.neg());
        }
        out
    }

    fn times(&self, other: &Ser3) -> Ser3 {
        let mut out = Ser3::zero(self.bound);
        for (&(a1, a2, a3), ca) in &self.coeffs {
            for (&(b1, b2, b3), cb) in &other.coeffs {
                let e = (a1 + b1, a2 + b2, a3 + b3);
                if e.0 + e.1 + e.2 > self.bound {
                    continue;
                }
                out.add(e, ca.mul(cb));
            }
        }
        out
    }

    fn scale_poly(&self, p: &Poly) -> Ser3 {
        let mut out = Ser3::zero(self.bound);
        for (&e, c) in &self.coeffs {
            out.add(e, c.mul(p));
        }
        out
    }
}

/// `F(a, b)` in three variables: both arguments must have zero constant
/// term, so the substitution terminates at the truncation bound.
fn subst(f: &TruncatedSeries, a: &Ser3, b: &Ser3) -> Ser3 {
    let bound = a.bound;
    // Power tables.
    let mut apow: Vec<Ser3> = vec![{
        let mut s = Ser3::zero(bound);
        s.add((0, 0, 0), Poly::one());
        s
    }];
    let mut bpow = apow.clone();
    for p in 1..=bound as usize {
        let next = apow[p - 1].times(a);
        apow.push(next);
        let next = bpow[p - 1].times(b);
        bpow.push(next);
    }
    let mut out = Ser3::zero(bound);
    for (&(p, q), c) in f.coeffs() {
        if p + q > bound {
            continue;
        }
        let term = apow[p as usize].times(&bpow[q as usize]).scale_poly(c);
        out = out.plus(&term);
    }
    out
}

/// Raw generic series `u + v + sum a_ij u^i v^j` over the given generator
/// table, with unreduced single-generator coefficients.
fn generic_series(bound: u32, gens: &[(u32, u32)]) -> TruncatedSeries {
    let mut coeffs = BTreeMap::new();
    coeffs.insert((1, 0), Poly::one());
    coeffs.insert((0, 1), Poly::one());
    for (g, &(i, j)) in gens.iter().enumerate() {
        if i + j <= bound {
            coeffs.insert(
                (i, j),
                Poly::from_mono(Mono {
                    exps: vec![(g, 1)],
                    degree: i + j - 1,
                }),
            );
        }
    }
    TruncatedSeries { bound, coeffs }
}

/// Associativity residual `F(F(u,v),w) - F(u,F(v,w))` expanded through the
/// truncation bound.
fn associativity_residual(f: &TruncatedSeries) -> Vec<((u32, u32, u32), Poly)> {
    let bound = f.bound;
    let u = Ser3::var(bound, 0);
    let v = Ser3::var(bound, 1);
    let w = Ser3::var(bound, 2);
    let fuv = subst(f, &u, &v);
    let fvw = subst(f, &v, &w);
    let lhs = subst(f, &fuv, &w);
    let rhs = subst(f, &u, &fvw);
    lhs.minus(&rhs)
        .coeffs
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// Builds the truncation and the universal formal group law with reduced
/// coefficients. `F(u,0) = u` and `F(0,v) = v` hold by construction; the
/// symmetry and associativity of the reduced series are checked by
/// [`series_compose_check`] and the test suite.
pub fn build_universal_fgl(bound: u32, limit: usize) -> Result<(LazardRing, TruncatedSeries)> {
    if bound < 1 {
        return Err(Error::InvalidInput("degree bound must be at least 1".into()));
    }
    let mut gens: Vec<(u32, u32)> = Vec::new();
    for s in 2..=bound + 1 {
        for i in 1..s {
            gens.push((i, s - i));
        }
    }
    gens.sort_by_key(|&(i, j)| (i + j, i));
    let gen_index: BTreeMap<(u32, u32), usize> =
        gens.iter().enumerate().map(|(g, &ij)| (ij, g)).collect();
    let degrees: Vec<u32> = gens.iter().map(|&(i, j)| i + j - 1).collect();

    let mut monos = Vec::new();
    let mut mono_index = Vec::new();
    for d in 0..=bound {
        let ms = monomials_of_degree(&degrees, d);
        if ms.len() > limit {
            return Err(Error::ResourceExceeded(format!(
                "{} monomials in degree {d} exceed the resource limit {limit}",
                ms.len()
            )));
        }
        mono_index.push(
            ms.iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), i))
                .collect::<BTreeMap<_, _>>(),
        );
        monos.push(ms);
    }

    // Base relations: commutativity plus associativity residual coefficients.
    let raw = generic_series(bound, &gens);
    let mut base: Vec<Poly> = Vec::new();
    for (&(i, j), _) in gen_index.iter() {
        if i < j {
            let gij = gen_index[&(i, j)];
            let gji = gen_index[&(j, i)];
            let mut p = Poly::from_mono(Mono {
                exps: vec![(gij, 1)],
                degree: i + j - 1,
            });
            p.add_term(
                Mono {
                    exps: vec![(gji, 1)],
                    degree: i + j - 1,
                },
                BigInt::from(-1),
            );
            base.push(p);
        }
    }
    for (_, c) in associativity_residual(&raw) {
        base.push(c);
    }

    // Degree-by-degree ideal lattices: rows are monomial multiples of the
    // base relations.
    let mut lattices = Vec::new();
    for d in 0..=bound {
        let basis = &monos[d as usize];
        let index = &mono_index[d as usize];
        let mut lat = Lattice::empty(basis.len());
        let mut rows = 0usize;
        for rel in &base {
            let rel_deg = rel.max_degree();
            if rel.is_zero() || rel_deg > d {
                continue;
            }
            for m in &monos[(d - rel_deg) as usize] {
                let prod = rel.mul(&Poly::from_mono(m.clone()));
                let mut v = vec![BigInt::zero(); basis.len()];
                for (mono, c) in prod.terms() {
                    v[index[mono]] = c.clone();
                }
                lat.insert(v);
                rows += 1;
                if rows * basis.len() > limit {
                    return Err(Error::ResourceExceeded(format!(
                        "relation lattice in degree {d} exceeds the resource limit {limit}"
                    )));
                }
            }
        }
        lat.back_reduce();
        lattices.push(lat);
    }

    let ring = LazardRing {
        bound,
        gens,
        gen_index,
        monos,
        mono_index,
        lattices,
    };

    // The universal law with coefficients in canonical form.
    let mut coeffs = BTreeMap::new();
    for (&(p, q), c) in raw.coeffs.iter() {
        let r = ring.reduce(c);
        if !r.is_zero() {
            coeffs.insert((p, q), r);
        }
    }
    let series = TruncatedSeries { bound, coeffs };
    Ok((ring, series))
}

/// Nonzero reduced coefficients of the associativity residual of `f`. Empty
/// exactly when `f` is associative through the truncation bound.
pub fn series_compose_check(ring: &LazardRing, f: &TruncatedSeries) -> Vec<((u32, u32, u32), Poly)> {
    associativity_residual(f)
        .into_iter()
        .map(|(e, c)| (e, ring.reduce(&c)))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// A finite combination of cycles with coefficients in the truncated Lazard
/// ring, over one theory arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LElement {
    arrow: MorphId,
    terms: BTreeMap<Cycle, Poly>,
}

impl LElement {
    pub fn zero(arrow: MorphId) -> LElement {
        LElement {
            arrow,
            terms: BTreeMap::new(),
        }
    }

    pub fn arrow(&self) -> MorphId {
        self.arrow
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Cycle, &Poly)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, cycle: Cycle, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(cycle.clone()).or_insert_with(Poly::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&cycle);
        }
    }

    /// Lifts an integer element with the unit coefficient.
    pub fn from_element(e: &Element) -> LElement {
        let mut out = LElement::zero(e.arrow());
        for (cycle, coeff) in e.terms() {
            out.add_term(cycle.clone(), Poly::constant(coeff.clone()));
        }
        out
    }

    pub fn sub(&self, other: &LElement) -> Result<LElement> {
        if self.arrow != other.arrow {
            return Err(Error::ArrowMismatch(
                "cannot subtract L-elements over different arrows".to_string(),
            ));
        }
        let mut out = self.clone();
        for (cycle, coeff) in &other.terms {
            out.add_term(cycle.clone(), coeff.neg());
        }
        Ok(out)
    }
}

/// Evaluates `F(c1(L), c1(M))` on `target`: the finite sum
/// `sum_{1 <= i+j <= min(bound, N)} F_ij . c1(L)^i c1(M)^j (target)` with
/// coefficients in the truncation.
///
/// The omitted tail `i + j > bound` must be certified dead by the relative
/// dimension axiom: for every term of `target` with composite relative
/// dimension `d` and `r` bundles this needs `min(bound, N) >= d - r`,
/// otherwise `BoundTooSmall` is returned.
pub fn evaluate_fgl(
    site: &Site,
    ring: &LazardRing,
    f: &TruncatedSeries,
    op_l: BundleId,
    op_m: BundleId,
    target: &Element,
    nilpotency_bound: u32,
) -> Result<LElement> {
    let limit = nilpotency_bound.min(ring.bound());
    for (cycle, _) in target.terms() {
        let comp = site.compose(target.arrow(), cycle.structure)?;
        let d = site.rel_dim(comp).unwrap_or(0);
        let need = d - cycle.r() as i64;
        if (limit as i64) < need {
            return Err(Error::BoundTooSmall(format!(
                "term {} needs series terms through total degree {need} before relative-dimension vanishing is certified, have {limit}",
                cycle.display(site)
            )));
        }
    }
    let mut out = LElement::zero(target.arrow());
    for (&(i, j), coeff) in f.coeffs() {
        if i + j == 0 || i + j > limit {
            continue;
        }
        let powered = chern_power(site, op_m, j as usize, target)?;
        let powered = chern_power(site, op_l, i as usize, &powered)?;
        for (cycle, n) in powered.terms() {
            out.add_term(cycle.clone(), coeff.scale(n));
        }
    }
    Ok(out)
}
