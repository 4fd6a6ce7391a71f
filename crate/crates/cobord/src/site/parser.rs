//! Line-oriented parser for the site description language.
//!
//! The exact grammar is documented in `docs/site-format.md`. Parsing is
//! two-phase: each line is checked against the grammar of its section
//! (grammar violations are `Error::Parse` with line/column and a rule id),
//! then names are resolved and tables are built (resolution failures and
//! structural conflicts are reported as validation issues).

use super::{
    BundleData, BundleId, MorphData, MorphId, ObjData, ObjId, ResolutionData, SectionData, Site,
    Square,
};
use crate::error::Issue;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    Punct(char),
}

struct Lexer<'a> {
    line: &'a str,
    lineno: usize,
    pos: usize,
    toks: Vec<(usize, Tok)>,
    cursor: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

impl<'a> Lexer<'a> {
    fn new(line: &'a str, lineno: usize) -> Result<Lexer<'a>> {
        let mut lx = Lexer {
            line,
            lineno,
            pos: 0,
            toks: Vec::new(),
            cursor: 0,
        };
        lx.scan()?;
        Ok(lx)
    }

    fn err(&self, col: usize, rule: &'static str, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.lineno,
            col: col + 1,
            rule,
            msg: msg.into(),
        }
    }

    fn scan(&mut self) -> Result<()> {
        let chars: Vec<char> = self.line.chars().collect();
        while self.pos < chars.len() {
            let c = chars[self.pos];
            let start = self.pos;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            if is_ident_start(c) {
                let mut s = String::new();
                while self.pos < chars.len() && is_ident_char(chars[self.pos]) {
                    s.push(chars[self.pos]);
                    self.pos += 1;
                }
                self.toks.push((start, Tok::Ident(s)));
                continue;
            }
            if c.is_ascii_digit() || (c == '-' && chars.get(self.pos + 1).is_some_and(|d| d.is_ascii_digit())) {
                let mut s = String::new();
                if c == '-' {
                    s.push('-');
                    self.pos += 1;
                }
                while self.pos < chars.len() && chars[self.pos].is_ascii_digit() {
                    s.push(chars[self.pos]);
                    self.pos += 1;
                }
                let v: i64 = s
                    .parse()
                    .map_err(|_| self.err(start, "int", format!("bad integer `{s}`")))?;
                self.toks.push((start, Tok::Int(v)));
                continue;
            }
            if c == '-' && chars.get(self.pos + 1) == Some(&'>') {
                self.pos += 2;
                self.toks.push((start, Tok::Arrow));
                continue;
            }
            if matches!(c, ':' | '=' | '.' | '(' | ')' | ',' | '*' | '~' | '[' | ']') {
                self.pos += 1;
                self.toks.push((start, Tok::Punct(c)));
                continue;
            }
            return Err(self.err(start, "char", format!("unexpected character `{c}`")));
        }
        Ok(())
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|(_, t)| t)
    }

    fn next(&mut self, rule: &'static str, what: &str) -> Result<(usize, Tok)> {
        if self.cursor < self.toks.len() {
            let t = self.toks[self.cursor].clone();
            self.cursor += 1;
            Ok(t)
        } else {
            Err(self.err(self.line.len(), rule, format!("expected {what}, found end of line")))
        }
    }

    fn ident(&mut self, rule: &'static str) -> Result<String> {
        match self.next(rule, "an identifier")? {
            (_, Tok::Ident(s)) => Ok(s),
            (col, t) => Err(self.err(col, rule, format!("expected an identifier, found {t:?}"))),
        }
    }

    fn punct(&mut self, c: char, rule: &'static str) -> Result<()> {
        match self.next(rule, &format!("`{c}`"))? {
            (_, Tok::Punct(p)) if p == c => Ok(()),
            (col, t) => Err(self.err(col, rule, format!("expected `{c}`, found {t:?}"))),
        }
    }

    fn arrow(&mut self, rule: &'static str) -> Result<()> {
        match self.next(rule, "`->`")? {
            (_, Tok::Arrow) => Ok(()),
            (col, t) => Err(self.err(col, rule, format!("expected `->`, found {t:?}"))),
        }
    }

    fn keyword(&mut self, kw: &str, rule: &'static str) -> Result<()> {
        match self.next(rule, &format!("`{kw}`"))? {
            (_, Tok::Ident(s)) if s == kw => Ok(()),
            (col, t) => Err(self.err(col, rule, format!("expected `{kw}`, found {t:?}"))),
        }
    }

    /// `key=<int>`
    fn key_int(&mut self, key: &str, rule: &'static str) -> Result<i64> {
        self.keyword(key, rule)?;
        self.punct('=', rule)?;
        match self.next(rule, "an integer")? {
            (_, Tok::Int(v)) => Ok(v),
            (col, t) => Err(self.err(col, rule, format!("expected an integer, found {t:?}"))),
        }
    }

    /// `key=<ident>`
    fn key_ident(&mut self, key: &str, rule: &'static str) -> Result<String> {
        self.keyword(key, rule)?;
        self.punct('=', rule)?;
        self.ident(rule)
    }

    fn finish(&self, rule: &'static str) -> Result<()> {
        if self.cursor < self.toks.len() {
            let (col, t) = &self.toks[self.cursor];
            Err(self.err(*col, rule, format!("unexpected trailing token {t:?}")))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug)]
enum Decl {
    Object {
        name: String,
        dim: i64,
        smooth: bool,
    },
    Morphism {
        name: String,
        source: String,
        target: String,
        proper: bool,
        smooth: bool,
        rel_dim: Option<i64>,
    },
    Composite {
        g: String,
        f: String,
        result: String,
    },
    SquareDecl {
        f: String,
        g: String,
        corner: String,
        proj1: String,
        proj2: String,
    },
    Bundle {
        name: String,
        base: String,
    },
    Pullback {
        morph: String,
        bundle: String,
        result: String,
    },
    Tensor {
        left: String,
        right: String,
        result: String,
        base: String,
    },
    Iso {
        left: String,
        right: String,
    },
    Section {
        name: String,
        bundle: String,
        base: String,
        zero: String,
        incl: String,
    },
    Resolution {
        name: String,
        source: String,
        target: String,
    },
}

const SECTIONS: &[&str] = &[
    "objects",
    "morphisms",
    "composites",
    "squares",
    "bundles",
    "pullbacks",
    "tensors",
    "isoclasses",
    "sections",
    "resolutions",
];

fn section_keyword(section: &str) -> &'static str {
    match section {
        "objects" => "object",
        "morphisms" => "morphism",
        "composites" => "composite",
        "squares" => "square",
        "bundles" => "bundle",
        "pullbacks" => "pullback",
        "tensors" => "tensor",
        "isoclasses" => "iso",
        "sections" => "section",
        "resolutions" => "resolution",
        _ => unreachable!(),
    }
}

pub(super) fn parse(text: &str) -> Result<Site> {
    let mut decls: Vec<(usize, Decl)> = Vec::new();
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            let name = trimmed
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .map(str::trim)
                .ok_or(Error::Parse {
                    line: lineno,
                    col: 1,
                    rule: "section",
                    msg: format!("malformed section header `{trimmed}`"),
                })?;
            if !SECTIONS.contains(&name) {
                return Err(Error::Parse {
                    line: lineno,
                    col: 1,
                    rule: "section",
                    msg: format!("unknown section `[{name}]`"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let sec = section.as_deref().ok_or(Error::Parse {
            line: lineno,
            col: 1,
            rule: "section",
            msg: "declarations must appear under a section header".to_string(),
        })?;
        let mut lx = Lexer::new(raw, lineno)?;
        let kw = lx.ident("keyword")?;
        let expected = section_keyword(sec);
        if kw != expected {
            return Err(Error::Parse {
                line: lineno,
                col: 1,
                rule: "keyword",
                msg: format!("expected `{expected}` in section [{sec}], found `{kw}`"),
            });
        }
        let decl = match sec {
            "objects" => parse_object(&mut lx)?,
            "morphisms" => parse_morphism(&mut lx)?,
            "composites" => parse_composite(&mut lx)?,
            "squares" => parse_square(&mut lx)?,
            "bundles" => parse_bundle(&mut lx)?,
            "pullbacks" => parse_pullback(&mut lx)?,
            "tensors" => parse_tensor(&mut lx)?,
            "isoclasses" => parse_iso(&mut lx)?,
            "sections" => parse_section(&mut lx)?,
            "resolutions" => parse_resolution(&mut lx)?,
            _ => unreachable!(),
        };
        decls.push((lineno, decl));
    }

    build(decls)
}

fn parse_object(lx: &mut Lexer) -> Result<Decl> {
    let name = lx.ident("object")?;
    let dim = lx.key_int("dim", "object")?;
    let mut smooth = false;
    while let Some(tok) = lx.peek().cloned() {
        match tok {
            Tok::Ident(s) if s == "smooth" && !smooth => {
                lx.ident("object")?;
                smooth = true;
            }
            _ => break,
        }
    }
    lx.finish("object")?;
    Ok(Decl::Object { name, dim, smooth })
}

fn parse_morphism(lx: &mut Lexer) -> Result<Decl> {
    let name = lx.ident("morphism")?;
    lx.punct(':', "morphism")?;
    let source = lx.ident("morphism")?;
    lx.arrow("morphism")?;
    let target = lx.ident("morphism")?;
    let mut proper = false;
    let mut smooth = false;
    let mut rel_dim = None;
    while let Some(tok) = lx.peek().cloned() {
        match tok {
            Tok::Ident(s) if s == "proper" && !proper => {
                lx.ident("morphism")?;
                proper = true;
            }
            Tok::Ident(s) if s == "smooth" && !smooth => {
                lx.ident("morphism")?;
                smooth = true;
            }
            Tok::Ident(s) if s == "reldim" && rel_dim.is_none() => {
                rel_dim = Some(lx.key_int("reldim", "morphism")?);
            }
            Tok::Ident(s) => {
                let (col, _) = lx.next("morphism", "")?;
                return Err(lx.err(col, "morphism", format!("unknown or repeated morphism flag `{s}`")));
            }
            _ => break,
        }
    }
    lx.finish("morphism")?;
    Ok(Decl::Morphism {
        name,
        source,
        target,
        proper,
        smooth,
        rel_dim,
    })
}

fn parse_composite(lx: &mut Lexer) -> Result<Decl> {
    let g = lx.ident("composite")?;
    lx.punct('.', "composite")?;
    let f = lx.ident("composite")?;
    lx.punct('=', "composite")?;
    let result = lx.ident("composite")?;
    lx.finish("composite")?;
    Ok(Decl::Composite { g, f, result })
}

fn parse_square(lx: &mut Lexer) -> Result<Decl> {
    lx.punct('(', "square")?;
    let f = lx.ident("square")?;
    lx.punct(',', "square")?;
    let g = lx.ident("square")?;
    lx.punct(')', "square")?;
    let corner = lx.key_ident("corner", "square")?;
    let proj1 = lx.key_ident("proj1", "square")?;
    let proj2 = lx.key_ident("proj2", "square")?;
    lx.finish("square")?;
    Ok(Decl::SquareDecl {
        f,
        g,
        corner,
        proj1,
        proj2,
    })
}

fn parse_bundle(lx: &mut Lexer) -> Result<Decl> {
    let name = lx.ident("bundle")?;
    lx.keyword("on", "bundle")?;
    let base = lx.ident("bundle")?;
    lx.finish("bundle")?;
    Ok(Decl::Bundle { name, base })
}

fn parse_pullback(lx: &mut Lexer) -> Result<Decl> {
    let morph = lx.ident("pullback")?;
    lx.punct('*', "pullback")?;
    let bundle = lx.ident("pullback")?;
    lx.punct('=', "pullback")?;
    let result = lx.ident("pullback")?;
    lx.finish("pullback")?;
    Ok(Decl::Pullback {
        morph,
        bundle,
        result,
    })
}

fn parse_tensor(lx: &mut Lexer) -> Result<Decl> {
    let left = lx.ident("tensor")?;
    lx.punct('(', "tensor")?;
    lx.keyword("x", "tensor")?;
    lx.punct(')', "tensor")?;
    let right = lx.ident("tensor")?;
    lx.punct('=', "tensor")?;
    let result = lx.ident("tensor")?;
    lx.keyword("on", "tensor")?;
    let base = lx.ident("tensor")?;
    lx.finish("tensor")?;
    Ok(Decl::Tensor {
        left,
        right,
        result,
        base,
    })
}

fn parse_iso(lx: &mut Lexer) -> Result<Decl> {
    let left = lx.ident("iso")?;
    lx.punct('~', "iso")?;
    let right = lx.ident("iso")?;
    lx.finish("iso")?;
    Ok(Decl::Iso { left, right })
}

fn parse_section(lx: &mut Lexer) -> Result<Decl> {
    let name = lx.ident("section")?;
    lx.punct(':', "section")?;
    let bundle = lx.ident("section")?;
    lx.keyword("on", "section")?;
    let base = lx.ident("section")?;
    let zero = lx.key_ident("zero", "section")?;
    let incl = lx.key_ident("incl", "section")?;
    lx.finish("section")?;
    Ok(Decl::Section {
        name,
        bundle,
        base,
        zero,
        incl,
    })
}

fn parse_resolution(lx: &mut Lexer) -> Result<Decl> {
    let name = lx.ident("resolution")?;
    lx.punct(':', "resolution")?;
    let source = lx.ident("resolution")?;
    lx.arrow("resolution")?;
    let target = lx.ident("resolution")?;
    lx.finish("resolution")?;
    Ok(Decl::Resolution {
        name,
        source,
        target,
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as representative.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

fn build(decls: Vec<(usize, Decl)>) -> Result<Site> {
    let mut site = Site::default();
    let mut issues: Vec<Issue> = Vec::new();
    let push = |issues: &mut Vec<Issue>, rule: &'static str, line: usize, msg: String| {
        issues.push(Issue {
            rule,
            line: Some(line),
            msg,
        });
    };

    // Objects.
    for (line, decl) in &decls {
        if let Decl::Object { name, dim, smooth } = decl {
            if site.obj_by_name.contains_key(name) {
                push(&mut issues, "unique-id", *line, format!("object `{name}` declared twice"));
                continue;
            }
            if *dim < 0 {
                push(&mut issues, "dim-nonneg", *line, format!("object `{name}` has negative dimension"));
                continue;
            }
            let id = ObjId(site.objects.len());
            site.objects.push(ObjData {
                name: name.clone(),
                dim: *dim as u32,
                is_smooth: *smooth,
                line: *line,
            });
            site.obj_by_name.insert(name.clone(), id);
        }
    }

    // Identity morphisms, one per object, named `id_<object>`.
    for i in 0..site.objects.len() {
        let obj = ObjId(i);
        let name = format!("id_{}", site.objects[i].name);
        let id = MorphId(site.morphisms.len());
        site.morphisms.push(MorphData {
            name: name.clone(),
            source: obj,
            target: obj,
            is_proper: true,
            is_smooth: true,
            rel_dim: Some(0),
            line: site.objects[i].line,
        });
        site.morph_by_name.insert(name, id);
        site.identities.push(id);
    }

    // Declared morphisms.
    for (line, decl) in &decls {
        if let Decl::Morphism {
            name,
            source,
            target,
            proper,
            smooth,
            rel_dim,
        } = decl
        {
            if site.morph_by_name.contains_key(name) {
                push(&mut issues, "unique-id", *line, format!("morphism `{name}` already declared (identity names `id_<object>` are reserved)"));
                continue;
            }
            let (src, tgt) = match (site.obj_by_name.get(source), site.obj_by_name.get(target)) {
                (Some(&s), Some(&t)) => (s, t),
                _ => {
                    push(&mut issues, "unknown-id", *line, format!("morphism `{name}` references an undeclared object"));
                    continue;
                }
            };
            let id = MorphId(site.morphisms.len());
            site.morphisms.push(MorphData {
                name: name.clone(),
                source: src,
                target: tgt,
                is_proper: *proper,
                is_smooth: *smooth,
                rel_dim: *rel_dim,
                line: *line,
            });
            site.morph_by_name.insert(name.clone(), id);
        }
    }

    // Composites.
    for (line, decl) in &decls {
        if let Decl::Composite { g, f, result } = decl {
            let ids: Option<(MorphId, MorphId, MorphId)> = (|| {
                Some((
                    *site.morph_by_name.get(g)?,
                    *site.morph_by_name.get(f)?,
                    *site.morph_by_name.get(result)?,
                ))
            })();
            let (g, f, k) = match ids {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("composite `{g}`.`{f}` = `{result}` references an undeclared morphism"));
                    continue;
                }
            };
            if site.is_identity(g) || site.is_identity(f) {
                let expected = if site.is_identity(g) { f } else { g };
                if k != expected {
                    push(&mut issues, "compose-identity", *line, format!(
                        "identity composite `{}`.`{}` must equal `{}`",
                        site.morph_name(g),
                        site.morph_name(f),
                        site.morph_name(expected)
                    ));
                }
                // Identity absorption is implicit; nothing is stored.
                continue;
            }
            if let Some(&prev) = site.composites.get(&(g, f)) {
                if prev != k {
                    push(&mut issues, "duplicate-composite", *line, format!(
                        "composite `{}`.`{}` declared twice with different results",
                        site.morph_name(g),
                        site.morph_name(f)
                    ));
                }
                continue;
            }
            site.composites.insert((g, f), k);
            site.composite_lines.insert((g, f), *line);
        }
    }

    // Squares (and their transposes).
    for (line, decl) in &decls {
        if let Decl::SquareDecl {
            f,
            g,
            corner,
            proj1,
            proj2,
        } = decl
        {
            let resolved: Option<(MorphId, MorphId, ObjId, MorphId, MorphId)> = (|| {
                Some((
                    *site.morph_by_name.get(f)?,
                    *site.morph_by_name.get(g)?,
                    *site.obj_by_name.get(corner)?,
                    *site.morph_by_name.get(proj1)?,
                    *site.morph_by_name.get(proj2)?,
                ))
            })();
            let (f, g, corner, proj1, proj2) = match resolved {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, "square references an undeclared name".to_string());
                    continue;
                }
            };
            if site.is_identity(f) || site.is_identity(g) {
                push(&mut issues, "square-identity-leg", *line, "squares with an identity leg are implicit and must not be declared".to_string());
                continue;
            }
            let sq = Square {
                corner,
                proj1,
                proj2,
            };
            let transpose = Square {
                corner,
                proj1: proj2,
                proj2: proj1,
            };
            for (key, val) in [((f, g), sq), ((g, f), transpose)] {
                if let Some(prev) = site.squares.get(&key) {
                    if *prev != val {
                        push(&mut issues, "square-conflict", *line, format!(
                            "square for (`{}`, `{}`) declared twice with different data",
                            site.morph_name(key.0),
                            site.morph_name(key.1)
                        ));
                    }
                } else {
                    site.squares.insert(key, val);
                }
            }
            site.square_lines.insert((f, g), *line);
        }
    }

    // Bundles.
    for (line, decl) in &decls {
        if let Decl::Bundle { name, base } = decl {
            if site.bundle_by_name.contains_key(name) {
                push(&mut issues, "unique-id", *line, format!("bundle `{name}` declared twice"));
                continue;
            }
            let base = match site.obj_by_name.get(base) {
                Some(&b) => b,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("bundle `{name}` references an undeclared object"));
                    continue;
                }
            };
            let id = BundleId(site.bundles.len());
            site.bundles.push(BundleData {
                name: name.clone(),
                base,
                line: *line,
            });
            site.bundle_by_name.insert(name.clone(), id);
        }
    }

    // Isomorphism classes (a declared partition; nothing is inferred).
    let mut uf = UnionFind::new(site.bundles.len());
    for (line, decl) in &decls {
        if let Decl::Iso { left, right } = decl {
            let pair: Option<(BundleId, BundleId)> = (|| {
                Some((*site.bundle_by_name.get(left)?, *site.bundle_by_name.get(right)?))
            })();
            let (l, r) = match pair {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("iso `{left}` ~ `{right}` references an undeclared bundle"));
                    continue;
                }
            };
            if site.bundles[l.0].base != site.bundles[r.0].base {
                push(&mut issues, "iso-typing", *line, format!("iso `{left}` ~ `{right}`: bundles live on different objects"));
                continue;
            }
            uf.union(l.0, r.0);
        }
    }
    site.iso_canon = (0..site.bundles.len()).map(|i| BundleId(uf.find(i))).collect();

    // Pullback table, canonicalized on both sides.
    for (line, decl) in &decls {
        if let Decl::Pullback {
            morph,
            bundle,
            result,
        } = decl
        {
            let resolved: Option<(MorphId, BundleId, BundleId)> = (|| {
                Some((
                    *site.morph_by_name.get(morph)?,
                    *site.bundle_by_name.get(bundle)?,
                    *site.bundle_by_name.get(result)?,
                ))
            })();
            let (m, b, r) = match resolved {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("pullback `{morph}* {bundle} = {result}` references an undeclared name"));
                    continue;
                }
            };
            if site.is_identity(m) {
                push(&mut issues, "pullback-identity", *line, "pullbacks along identities are implicit and must not be declared".to_string());
                continue;
            }
            let md = &site.morphisms[m.0];
            if site.bundles[b.0].base != md.target || site.bundles[r.0].base != md.source {
                push(&mut issues, "pullback-typing", *line, format!(
                    "pullback `{morph}* {bundle} = {result}`: bundle bases do not match the morphism"
                ));
                continue;
            }
            let key = (m, site.canon(b));
            let val = site.canon(r);
            if let Some(&prev) = site.pullbacks.get(&key) {
                if site.canon(prev) != val {
                    push(&mut issues, "pullback-iso-coherence", *line, format!(
                        "pullback of `{bundle}` along `{morph}` declared twice with non-isomorphic results"
                    ));
                }
                continue;
            }
            site.pullbacks.insert(key, val);
            site.pullback_lines.insert(key, *line);
        }
    }

    // Tensor table, symmetric, canonicalized.
    for (line, decl) in &decls {
        if let Decl::Tensor {
            left,
            right,
            result,
            base,
        } = decl
        {
            let resolved: Option<(BundleId, BundleId, BundleId, ObjId)> = (|| {
                Some((
                    *site.bundle_by_name.get(left)?,
                    *site.bundle_by_name.get(right)?,
                    *site.bundle_by_name.get(result)?,
                    *site.obj_by_name.get(base)?,
                ))
            })();
            let (l, r, t, b) = match resolved {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("tensor `{left} (x) {right} = {result}` references an undeclared name"));
                    continue;
                }
            };
            if site.bundles[l.0].base != b || site.bundles[r.0].base != b || site.bundles[t.0].base != b {
                push(&mut issues, "tensor-typing", *line, format!(
                    "tensor `{left} (x) {right} = {result} on {base}`: all bundles must live on `{base}`"
                ));
                continue;
            }
            let (lc, rc) = (site.canon(l), site.canon(r));
            let key = (lc.min(rc), lc.max(rc));
            let val = site.canon(t);
            if let Some(&prev) = site.tensors.get(&key) {
                if site.canon(prev) != val {
                    push(&mut issues, "tensor-commutative", *line, format!(
                        "tensor of `{left}` and `{right}` declared twice with non-isomorphic results"
                    ));
                }
                continue;
            }
            site.tensors.insert(key, val);
            site.tensor_lines.insert(key, *line);
        }
    }

    // Sections.
    for (line, decl) in &decls {
        if let Decl::Section {
            name,
            bundle,
            base,
            zero,
            incl,
        } = decl
        {
            let resolved: Option<(BundleId, ObjId, ObjId, MorphId)> = (|| {
                Some((
                    *site.bundle_by_name.get(bundle)?,
                    *site.obj_by_name.get(base)?,
                    *site.obj_by_name.get(zero)?,
                    *site.morph_by_name.get(incl)?,
                ))
            })();
            let (b, v, z, i) = match resolved {
                Some(t) => t,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("section `{name}` references an undeclared name"));
                    continue;
                }
            };
            if site.bundles[b.0].base != v {
                push(&mut issues, "section-typing", *line, format!("section `{name}`: bundle `{bundle}` does not live on `{base}`"));
                continue;
            }
            let id_ = &site.morphisms[i.0];
            if id_.source != z || id_.target != v {
                push(&mut issues, "section-typing", *line, format!("section `{name}`: inclusion `{incl}` is not a morphism `{zero} -> {base}`"));
                continue;
            }
            site.sections.push(SectionData {
                name: name.clone(),
                bundle: b,
                zero_locus: z,
                inclusion: i,
                line: *line,
            });
        }
    }

    // Resolutions.
    for (line, decl) in &decls {
        if let Decl::Resolution {
            name,
            source,
            target,
        } = decl
        {
            let m = match site.morph_by_name.get(name) {
                Some(&m) => m,
                None => {
                    push(&mut issues, "unknown-id", *line, format!("resolution `{name}` is not a declared morphism"));
                    continue;
                }
            };
            let md = &site.morphisms[m.0];
            let src_ok = site.obj_by_name.get(source) == Some(&md.source);
            let tgt_ok = site.obj_by_name.get(target) == Some(&md.target);
            if !src_ok || !tgt_ok {
                push(&mut issues, "resolution-typing", *line, format!("resolution `{name} : {source} -> {target}` does not match the declared morphism"));
                continue;
            }
            site.resolutions.push(ResolutionData {
                name: name.clone(),
                map: m,
                line: *line,
            });
        }
    }

    if issues.is_empty() {
        Ok(site)
    } else {
        Err(Error::validation(issues))
    }
}
