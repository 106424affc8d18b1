//! Concrete syntax for formulas.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula  := quantified | implication
//! quantified := ("A" var | "E" var | "E>=" nat var) "." formula
//! implication := disjunction ["->" implication]
//! disjunction := conjunction ("|" conjunction)*
//! conjunction := unary ("&" unary)*
//! unary    := "!" unary | "(" formula ")" | atom
//! atom     := pred [index] "(" var ")" | var "=" var
//! index    := "_" (nat | meta) | "<" entries ">"
//! ```
//!
//! A quantifier scopes as far to the right as possible. Indices in `<...>`
//! with all-numeric entries are concrete paths; `<s>` and `<s,i>` with
//! identifiers are the schema metavariable forms.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::logic::{
    Formula, IndexTerm, PredIndex, Sentence, Signature, Template, TemplateSymbol,
};
use crate::tree::NodePath;

/// Parses a formula whose predicates must all be declared in `sig`.
/// Metavariable indices are rejected; free variables are allowed.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let template = parse_template(text)?;
    let f = template.map_symbols(&mut |t: &TemplateSymbol| t.resolve())?;
    for p in f.predicates() {
        sig.check(&p)?;
    }
    Ok(f)
}

/// Parses and closes a sentence; free variables are an error.
pub fn parse_sentence(text: &str, sig: &Signature) -> Result<Sentence> {
    Sentence::new(parse_formula(text, sig)?)
}

/// Parses a schema template; indices may be metavariables.
pub fn parse_template(text: &str) -> Result<Template> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::parse(p.pos, "trailing input"));
    }
    Ok(f)
}

/// Canonical text form; `parse . format` is the identity on formulas.
pub fn format_formula<S: std::fmt::Display>(f: &Formula<S>) -> String {
    let mut out = String::new();
    write_formula(f, 0, &mut out);
    out
}

fn prec<S>(f: &Formula<S>) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(..) => 4,
        Formula::Pred(..) | Formula::Eq(..) => 5,
    }
}

fn write_formula<S: std::fmt::Display>(f: &Formula<S>, min: u8, out: &mut String) {
    let wrap = prec(f) < min;
    if wrap {
        out.push('(');
    }
    match f {
        Formula::Pred(sym, v) => {
            let _ = write!(out, "{sym}({v})");
        }
        Formula::Eq(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        Formula::Not(a) => {
            out.push('!');
            write_formula(a, 4, out);
        }
        Formula::And(a, b) => {
            write_formula(a, 3, out);
            out.push_str(" & ");
            write_formula(b, 4, out);
        }
        Formula::Or(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" | ");
            write_formula(b, 3, out);
        }
        Formula::Implies(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" -> ");
            // A trailing quantifier needs no parentheses: implication is
            // right-associative and quantifier scope is maximal.
            write_formula(b, 0, out);
        }
        Formula::Exists(v, a) => {
            let _ = write!(out, "E {v}. ");
            write_formula(a, 0, out);
        }
        Formula::Forall(v, a) => {
            let _ = write!(out, "A {v}. ");
            write_formula(a, 0, out);
        }
        Formula::CountExists(n, v, a) => {
            let _ = write!(out, "E>={n} {v}. ");
            write_formula(a, 0, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{token}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(Error::parse(start, "expected an identifier"));
        }
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }

    fn nat(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::parse(start, "expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(start, "number out of range"))
    }

    /// True when the upcoming input continues as a quantifier after a bare
    /// `A` or `E`: either an identifier (the bound variable) or `>=`.
    fn quantifier_follows(&mut self) -> bool {
        let save = self.pos;
        self.skip_ws();
        let c = self.src.get(self.pos).copied();
        self.pos = save;
        c.is_some_and(|c| c.is_ascii_alphabetic()) || {
            let save = self.pos;
            let two = self.eat(">=");
            self.pos = save;
            two
        }
    }

    fn formula(&mut self) -> Result<Template> {
        self.implication()
    }

    fn implication(&mut self) -> Result<Template> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Template> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            acc = acc.or(self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Template> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            acc = acc.and(self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Template> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            _ => self.atom_or_quantifier(),
        }
    }

    fn atom_or_quantifier(&mut self) -> Result<Template> {
        let start = self.pos;
        let name = self.ident()?;
        if (name == "A" || name == "E") && self.quantifier_follows() {
            return self.quantifier(name == "A");
        }
        match self.peek() {
            Some(b'=') => {
                self.pos += 1;
                let rhs = self.ident()?;
                Ok(Formula::eq(name, rhs))
            }
            Some(b'_') | Some(b'<') | Some(b'(') => {
                let index = self.index()?;
                self.expect("(")?;
                let var = self.ident()?;
                self.expect(")")?;
                Ok(Formula::pred(TemplateSymbol { family: name, index }, var))
            }
            _ => Err(Error::parse(
                start,
                "expected a predicate application, an equality, or a quantifier",
            )),
        }
    }

    fn quantifier(&mut self, universal: bool) -> Result<Template> {
        let threshold = if !universal && self.eat(">=") {
            let pos = self.pos;
            let n = self.nat()?;
            if n == 0 {
                return Err(Error::parse(pos, "counting threshold must be >= 1"));
            }
            Some(u32::try_from(n).map_err(|_| Error::parse(pos, "threshold too large"))?)
        } else {
            None
        };
        let var = self.ident()?;
        self.expect(".")?;
        let body = self.formula()?;
        Ok(match (universal, threshold) {
            (true, _) => Formula::forall(var, body),
            (false, None) => Formula::exists(var, body),
            (false, Some(n)) => Formula::count_exists(n, var, body),
        })
    }

    /// The optional index after a family name. An empty index (the next
    /// character is `(`) yields a plain symbol.
    fn index(&mut self) -> Result<IndexTerm> {
        match self.peek() {
            Some(b'_') => {
                self.pos += 1;
                self.skip_ws();
                if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    Ok(IndexTerm::Const(PredIndex::Nat(self.nat()?)))
                } else {
                    Ok(IndexTerm::MetaNat(self.ident()?))
                }
            }
            Some(b'<') => {
                self.pos += 1;
                let mut nats: Vec<u64> = Vec::new();
                let mut idents: Vec<String> = Vec::new();
                if self.peek() != Some(b'>') {
                    loop {
                        self.skip_ws();
                        if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                            nats.push(self.nat()?);
                        } else {
                            idents.push(self.ident()?);
                        }
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.expect(">")?;
                match (nats.len(), idents.as_slice()) {
                    (_, []) => Ok(IndexTerm::Const(PredIndex::Path(NodePath::new(nats)))),
                    (0, [s]) => Ok(IndexTerm::MetaPath(s.clone())),
                    (0, [s, i]) => Ok(IndexTerm::MetaChild(s.clone(), i.clone())),
                    _ => Err(Error::parse(
                        self.pos,
                        "a path index is all numbers, `<s>`, or `<s,i>`",
                    )),
                }
            }
            _ => Ok(IndexTerm::Const(PredIndex::None)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::IndexKind;

    fn sig() -> Signature {
        Signature::new()
            .declare("U", IndexKind::Nat)
            .declare("Q", IndexKind::Nat)
            .declare("P", IndexKind::Path)
            .declare("R", IndexKind::None)
    }

    fn round_trip(text: &str) -> String {
        format_formula(&parse_formula(text, &sig()).unwrap())
    }

    #[test]
    fn parse_examples() {
        assert_eq!(round_trip("A x. (P<0>(x) -> U_0(x))"), "A x. P<0>(x) -> U_0(x)");
        assert_eq!(round_trip("E>=3 x. U_0(x)"), "E>=3 x. U_0(x)");
        assert_eq!(round_trip("E x. x = x"), "E x. x = x");
    }

    #[test]
    fn precedence_and_scope() {
        let f = parse_formula("!U_0(x) & U_1(x) | U_2(x) -> U_3(x)", &sig()).unwrap();
        assert_eq!(
            format_formula(&f),
            "!U_0(x) & U_1(x) | U_2(x) -> U_3(x)"
        );
        // Quantifier scope is maximal.
        let g = parse_formula("E x. U_0(x) -> U_1(x)", &sig()).unwrap();
        assert!(matches!(g, Formula::Exists(..)));
        // Reparsing the canonical form gives the same tree.
        assert_eq!(parse_formula(&format_formula(&g), &sig()).unwrap(), g);
    }

    #[test]
    fn plain_and_indexed_atoms() {
        assert_eq!(round_trip("R(x) & P<1,0>(x)"), "R(x) & P<1,0>(x)");
        let f = parse_formula("P<>(x)", &sig()).unwrap();
        assert_eq!(format_formula(&f), "P<>(x)");
    }

    #[test]
    fn unknown_or_misindexed_predicates_are_rejected() {
        assert!(parse_formula("Z(x)", &sig()).is_err());
        assert!(parse_formula("U<0>(x)", &sig()).is_err());
        assert!(parse_formula("P_3(x)", &sig()).is_err());
        assert!(parse_formula("R_1(x)", &sig()).is_err());
    }

    #[test]
    fn template_metavariables() {
        let t = parse_template("!(E x. P<s,i>(x)) -> A x. (P<s>(x) -> U_i(x))").unwrap();
        let syms = t.symbols();
        assert_eq!(syms.len(), 3);
        assert_eq!(syms[0].index, IndexTerm::MetaChild("s".into(), "i".into()));
        assert_eq!(syms[1].index, IndexTerm::MetaPath("s".into()));
        assert_eq!(syms[2].index, IndexTerm::MetaNat("i".into()));
        // Metavariables cannot appear in a concrete formula.
        assert!(parse_formula("U_i(x)", &sig()).is_err());
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_formula("U_0(x) &", &sig()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_formula("E>=0 x. U_0(x)", &sig()).is_err());
        assert!(parse_formula("U_0(x", &sig()).is_err());
        assert!(parse_formula("", &sig()).is_err());
    }

    #[test]
    fn quantifier_named_predicates_still_parse() {
        let s = Signature::new().declare("A", IndexKind::None).declare("E", IndexKind::Nat);
        let f = parse_formula("A(x) & E_2(x)", &s).unwrap();
        assert_eq!(format_formula(&f), "A(x) & E_2(x)");
        let g = parse_formula("A y. A(y)", &s).unwrap();
        assert!(matches!(g, Formula::Forall(..)));
    }
}
