//! The element expression grammar used by the CLI:
//!
//! ```text
//! expr  := ['-'] term (('+' | '-') term)*
//! term  := [int '*'] cycle
//! cycle := '[' ident '->' ident ident [';' ident (',' ident)*] ']'
//! ```
//!
//! so `3*[V ->h X ; L1,L2] - [W ->k X]` is three times the cycle with
//! structure morphism `h` and bundles `L1, L2`, minus the bare cycle over
//! `k`. The serialized canonical form is the sorted term list with explicit
//! coefficients, e.g. `3*[V ->h X; L1,L2] - 1*[W ->k X]`; the zero element
//! prints as `0`.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::cycles::{make_cycle, Element};
use crate::site::{MorphId, Site};
use crate::{Error, Result};

struct Scanner<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Scanner<'a> {
        Scanner {
            chars: text.chars().collect(),
            pos: 0,
            text,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: 1,
            col: self.pos + 1,
            rule: "expr",
            msg: format!("{} (in `{}`)", msg.into(), self.text),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat(&mut self, c: char) -> Result<()> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            Some(got) => Err(self.err(format!("expected `{c}`, found `{got}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        if self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphabetic() || *c == '_')
        {
            self.pos += 1;
            while self
                .chars
                .get(self.pos)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '\'')
            {
                self.pos += 1;
            }
            Ok(self.chars[start..self.pos].iter().collect())
        } else {
            Err(self.err("expected an identifier"))
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("bad integer"))
    }
}

/// Parses an expression over the given theory arrow, validating every cycle
/// against the site.
pub fn parse_element(site: &Site, arrow: MorphId, text: &str) -> Result<Element> {
    let mut sc = Scanner::new(text);
    let mut out = Element::zero(arrow);
    let mut sign = BigInt::from(1);
    match sc.peek() {
        Some('-') => {
            sc.bump();
            sign = -sign;
        }
        Some('+') => {
            sc.bump();
        }
        _ => {}
    }
    loop {
        let (cycle, coeff) = parse_term(site, arrow, &mut sc)?;
        out = crate::cycles::add(
            &out,
            &crate::cycles::scale(&(coeff * &sign), &Element::from_cycle(arrow, cycle)),
        )?;
        match sc.peek() {
            None => break,
            Some('+') => {
                sc.bump();
                sign = BigInt::from(1);
            }
            Some('-') => {
                sc.bump();
                sign = BigInt::from(-1);
            }
            Some(c) => return Err(sc.err(format!("expected `+`, `-` or end of input, found `{c}`"))),
        }
    }
    Ok(out)
}

fn parse_term(
    site: &Site,
    arrow: MorphId,
    sc: &mut Scanner,
) -> Result<(crate::cycles::Cycle, BigInt)> {
    let mut coeff = BigInt::from(1);
    if sc.peek().is_some_and(|c| c.is_ascii_digit()) {
        coeff = sc.integer()?;
        sc.eat('*')?;
    }
    sc.eat('[')?;
    let src = sc.ident()?;
    sc.eat('-')?;
    sc.eat('>')?;
    let morph = sc.ident()?;
    let tgt = sc.ident()?;
    let mut bundles = Vec::new();
    match sc.peek() {
        Some(';') => {
            sc.bump();
            loop {
                let b = sc.ident()?;
                bundles.push(site.bundle_named(&b)?);
                match sc.peek() {
                    Some(',') => {
                        sc.bump();
                    }
                    _ => break,
                }
            }
            sc.eat(']')?;
        }
        Some(']') => {
            sc.bump();
        }
        Some(c) => return Err(sc.err(format!("expected `;` or `]`, found `{c}`"))),
        None => return Err(sc.err("unterminated cycle")),
    }
    let structure = site.morphism_named(&morph)?;
    let md = site.morphism(structure);
    if site.obj_name(md.source) != src || site.obj_name(md.target) != tgt {
        return Err(Error::InvalidInput(format!(
            "cycle `[{} ->{} {}]` does not match the declared morphism `{}: {} -> {}`",
            src,
            morph,
            tgt,
            morph,
            site.obj_name(md.source),
            site.obj_name(md.target)
        )));
    }
    let (cycle, _) = make_cycle(site, structure, arrow, &bundles)?;
    Ok((cycle, coeff))
}

/// The canonical serialized form: sorted, deduplicated terms with explicit
/// coefficients.
pub fn canonical_string(site: &Site, e: &Element) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (cycle, coeff)) in e.terms().enumerate() {
        if idx == 0 {
            if coeff.is_negative() {
                out.push_str("- ");
            }
        } else if coeff.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&format!("{}*{}", coeff.abs(), cycle.display(site)));
    }
    out
}
