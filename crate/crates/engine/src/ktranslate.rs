//! Syntactic translation of second-order arithmetic into first-order
//! arithmetic with a standardness predicate `K`.
//!
//! Each set variable `X` is replaced by a number variable `x_X` thought of
//! as a code for the set; membership `t in X` becomes `K(t) & (x_X)_t != 0`,
//! number quantifiers relativize to `K`, and set quantifiers become number
//! quantifiers over codes. The coding atom `(a)_t != 0` is kept
//! uninterpreted: the translation is purely syntactic and no sequence
//! coding is implemented.
//!
//! Input formulas may use the derived connectives `&`, `->` and the
//! universal quantifiers; they are desugared to `=`, `|`, `!`, `E` before
//! translating, and set equality `X = Y` is expanded extensionally first.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A number term over `0`, `1`, `+`, `*` and number variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NumTerm {
    Zero,
    One,
    Var(String),
    Add(Box<NumTerm>, Box<NumTerm>),
    Mul(Box<NumTerm>, Box<NumTerm>),
}

impl NumTerm {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            NumTerm::Zero | NumTerm::One => {}
            NumTerm::Var(v) => {
                out.insert(v.clone());
            }
            NumTerm::Add(a, b) | NumTerm::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

impl fmt::Display for NumTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTerm::Zero => f.write_str("0"),
            NumTerm::One => f.write_str("1"),
            NumTerm::Var(v) => f.write_str(v),
            NumTerm::Add(a, b) => write!(f, "{a} + {b}"),
            NumTerm::Mul(a, b) => {
                let wrap = |t: &NumTerm| matches!(t, NumTerm::Add(..));
                let paren = |t: &NumTerm, f: &mut fmt::Formatter<'_>| {
                    if wrap(t) {
                        write!(f, "({t})")
                    } else {
                        write!(f, "{t}")
                    }
                };
                paren(a, f)?;
                f.write_str(" * ")?;
                paren(b, f)
            }
        }
    }
}

/// A second-order arithmetic formula. Set variables are capitalized;
/// `And`, `Implies` and the universal quantifiers are input sugar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SoFormula {
    EqNum(NumTerm, NumTerm),
    InSet(NumTerm, String),
    EqSet(String, String),
    Not(Box<SoFormula>),
    Or(Box<SoFormula>, Box<SoFormula>),
    And(Box<SoFormula>, Box<SoFormula>),
    Implies(Box<SoFormula>, Box<SoFormula>),
    ExistsNum(String, Box<SoFormula>),
    ExistsSet(String, Box<SoFormula>),
    ForallNum(String, Box<SoFormula>),
    ForallSet(String, Box<SoFormula>),
}

impl SoFormula {
    fn num_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            SoFormula::EqNum(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            SoFormula::InSet(t, _) => t.vars(out),
            SoFormula::EqSet(..) => {}
            SoFormula::Not(a) => a.num_vars(out),
            SoFormula::Or(a, b) | SoFormula::And(a, b) | SoFormula::Implies(a, b) => {
                a.num_vars(out);
                b.num_vars(out);
            }
            SoFormula::ExistsNum(v, a) | SoFormula::ForallNum(v, a) => {
                out.insert(v.clone());
                a.num_vars(out);
            }
            SoFormula::ExistsSet(_, a) | SoFormula::ForallSet(_, a) => a.num_vars(out),
        }
    }

    fn set_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            SoFormula::EqNum(..) => {}
            SoFormula::InSet(_, x) => {
                out.insert(x.clone());
            }
            SoFormula::EqSet(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            SoFormula::Not(a) => a.set_vars(out),
            SoFormula::Or(a, b) | SoFormula::And(a, b) | SoFormula::Implies(a, b) => {
                a.set_vars(out);
                b.set_vars(out);
            }
            SoFormula::ExistsNum(_, a) | SoFormula::ForallNum(_, a) => a.set_vars(out),
            SoFormula::ExistsSet(x, a) | SoFormula::ForallSet(x, a) => {
                out.insert(x.clone());
                a.set_vars(out);
            }
        }
    }

    /// Rewrites the sugar (`&`, `->`, universal quantifiers) into the
    /// primitive connectives `!`, `|`, `E`.
    pub fn desugar(&self) -> SoFormula {
        match self {
            SoFormula::EqNum(..) | SoFormula::InSet(..) | SoFormula::EqSet(..) => self.clone(),
            SoFormula::Not(a) => SoFormula::Not(Box::new(a.desugar())),
            SoFormula::Or(a, b) => {
                SoFormula::Or(Box::new(a.desugar()), Box::new(b.desugar()))
            }
            SoFormula::And(a, b) => SoFormula::Not(Box::new(SoFormula::Or(
                Box::new(SoFormula::Not(Box::new(a.desugar()))),
                Box::new(SoFormula::Not(Box::new(b.desugar()))),
            ))),
            SoFormula::Implies(a, b) => SoFormula::Or(
                Box::new(SoFormula::Not(Box::new(a.desugar()))),
                Box::new(b.desugar()),
            ),
            SoFormula::ExistsNum(v, a) => {
                SoFormula::ExistsNum(v.clone(), Box::new(a.desugar()))
            }
            SoFormula::ExistsSet(x, a) => {
                SoFormula::ExistsSet(x.clone(), Box::new(a.desugar()))
            }
            SoFormula::ForallNum(v, a) => SoFormula::Not(Box::new(SoFormula::ExistsNum(
                v.clone(),
                Box::new(SoFormula::Not(Box::new(a.desugar()))),
            ))),
            SoFormula::ForallSet(x, a) => SoFormula::Not(Box::new(SoFormula::ExistsSet(
                x.clone(),
                Box::new(SoFormula::Not(Box::new(a.desugar()))),
            ))),
        }
    }
}

/// A first-order arithmetic formula with the standardness predicate and
/// uninterpreted coding atoms. No set variables, by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KFormula {
    EqNum(NumTerm, NumTerm),
    /// `K(t)`.
    Standard(NumTerm),
    /// `(code)_elem != 0`: the `elem`th entry of the sequence coded by the
    /// variable `code` is nonzero.
    Coded { code: String, elem: NumTerm },
    Not(Box<KFormula>),
    Or(Box<KFormula>, Box<KFormula>),
    And(Box<KFormula>, Box<KFormula>),
    ExistsNum(String, Box<KFormula>),
}

/// The code variable standing for a set variable.
pub fn code_var(set_var: &str) -> String {
    format!("x_{set_var}")
}

/// Translates a second-order formula into the `K`-language.
///
/// Fails when a number variable of the input collides with a reserved code
/// variable `x_X` for a set variable `X` of the input.
pub fn k_translate(theta: &SoFormula) -> Result<KFormula> {
    let mut nums = BTreeSet::new();
    theta.num_vars(&mut nums);
    let mut sets = BTreeSet::new();
    theta.set_vars(&mut sets);
    for x in &sets {
        if nums.contains(&code_var(x)) {
            return Err(Error::NamespaceCollision(format!(
                "number variable `{}` is reserved as the code of `{x}`",
                code_var(x)
            )));
        }
    }
    let mut fresh = FreshVars {
        taken: nums,
        counter: 0,
    };
    translate(&theta.desugar(), &mut fresh)
}

struct FreshVars {
    taken: BTreeSet<String>,
    counter: u32,
}

impl FreshVars {
    fn next(&mut self) -> String {
        loop {
            let v = format!("v{}", self.counter);
            self.counter += 1;
            if self.taken.insert(v.clone()) {
                return v;
            }
        }
    }
}

fn translate(theta: &SoFormula, fresh: &mut FreshVars) -> Result<KFormula> {
    Ok(match theta {
        SoFormula::EqNum(t, r) => KFormula::EqNum(t.clone(), r.clone()),
        SoFormula::InSet(t, x) => KFormula::And(
            Box::new(KFormula::Standard(t.clone())),
            Box::new(KFormula::Coded {
                code: code_var(x),
                elem: t.clone(),
            }),
        ),
        SoFormula::EqSet(x, y) => {
            // Expanded extensionally with a fresh number variable, then
            // translated: (A v. v in X <-> v in Y)^K.
            let v = fresh.next();
            let member = |set: &str| {
                SoFormula::InSet(NumTerm::Var(v.clone()), set.to_string())
            };
            let iff = SoFormula::And(
                Box::new(SoFormula::Implies(Box::new(member(x)), Box::new(member(y)))),
                Box::new(SoFormula::Implies(Box::new(member(y)), Box::new(member(x)))),
            );
            let closed = SoFormula::ForallNum(v, Box::new(iff));
            translate(&closed.desugar(), fresh)?
        }
        SoFormula::Not(a) => KFormula::Not(Box::new(translate(a, fresh)?)),
        SoFormula::Or(a, b) => KFormula::Or(
            Box::new(translate(a, fresh)?),
            Box::new(translate(b, fresh)?),
        ),
        SoFormula::ExistsNum(v, a) => {
            let body = translate(a, fresh)?;
            let guard = KFormula::Standard(NumTerm::Var(v.clone()));
            // Skip the relativizing guard when the body already leads with
            // it, as happens for a bare membership atom.
            let guarded = match &body {
                KFormula::And(lhs, _) if **lhs == guard => body,
                _ => KFormula::And(Box::new(guard), Box::new(body)),
            };
            KFormula::ExistsNum(v.clone(), Box::new(guarded))
        }
        SoFormula::ExistsSet(x, a) => {
            KFormula::ExistsNum(code_var(x), Box::new(translate(a, fresh)?))
        }
        SoFormula::And(..) | SoFormula::Implies(..) | SoFormula::ForallNum(..)
        | SoFormula::ForallSet(..) => unreachable!("desugared before translation"),
    })
}

// ---------------------------------------------------------------------------
// Concrete syntax

/// Parses the second-order grammar: quantifiers `EX X.` `AX X.` `E n.`
/// `A n.`, connectives `!`, `&`, `|`, `->`, atoms `t in X`, `t = r`,
/// `X = Y`, terms over `0 1 + *`. Set variables start upper-case, number
/// variables lower-case.
pub fn parse_so(text: &str) -> Result<SoFormula> {
    let mut p = SoParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::parse(p.pos, "trailing input"));
    }
    check_bindings(&f, &mut Vec::new())?;
    Ok(f)
}

fn check_bindings(f: &SoFormula, scope: &mut Vec<String>) -> Result<()> {
    match f {
        SoFormula::EqNum(..) | SoFormula::InSet(..) | SoFormula::EqSet(..) => Ok(()),
        SoFormula::Not(a) => check_bindings(a, scope),
        SoFormula::Or(a, b) | SoFormula::And(a, b) | SoFormula::Implies(a, b) => {
            check_bindings(a, scope)?;
            check_bindings(b, scope)
        }
        SoFormula::ExistsNum(v, a)
        | SoFormula::ForallNum(v, a)
        | SoFormula::ExistsSet(v, a)
        | SoFormula::ForallSet(v, a) => {
            if scope.contains(v) {
                return Err(Error::Variable(format!("`{v}` is bound twice")));
            }
            scope.push(v.clone());
            check_bindings(a, scope)?;
            scope.pop();
            Ok(())
        }
    }
}

struct SoParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> SoParser<'a> {
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
            return Err(Error::parse(start, "expected a variable"));
        }
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }

    fn formula(&mut self) -> Result<SoFormula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.formula()?;
            Ok(SoFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<SoFormula> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            acc = SoFormula::Or(Box::new(acc), Box::new(self.conjunction()?));
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<SoFormula> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            acc = SoFormula::And(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<SoFormula> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(SoFormula::Not(Box::new(self.unary()?)))
            }
            Some(b'(') => {
                let save = self.pos;
                self.pos += 1;
                // Could be a parenthesized formula or a parenthesized term
                // starting an atom; try the formula first.
                let attempt = (|| -> Result<SoFormula> {
                    let f = self.formula()?;
                    self.expect(")")?;
                    Ok(f)
                })();
                match attempt {
                    Ok(f) => Ok(f),
                    Err(_) => {
                        self.pos = save;
                        self.atom()
                    }
                }
            }
            _ => {
                let save = self.pos;
                let word = self.ident()?;
                let quantifier_var = self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphabetic());
                match (word.as_str(), quantifier_var) {
                    ("EX", true) => self.quantifier(SoFormula::ExistsSet, true),
                    ("AX", true) => self.quantifier(SoFormula::ForallSet, true),
                    ("E", true) => self.quantifier(SoFormula::ExistsNum, false),
                    ("A", true) => self.quantifier(SoFormula::ForallNum, false),
                    _ => {
                        self.pos = save;
                        self.atom()
                    }
                }
            }
        }
    }

    fn quantifier(
        &mut self,
        build: fn(String, Box<SoFormula>) -> SoFormula,
        set_sort: bool,
    ) -> Result<SoFormula> {
        let pos = self.pos;
        let var = self.ident()?;
        let upper = var.chars().next().is_some_and(|c| c.is_ascii_uppercase());
        if set_sort && !upper {
            return Err(Error::Sort(format!(
                "`{var}` at {pos} is not a set variable (set variables are capitalized)"
            )));
        }
        if !set_sort && upper {
            return Err(Error::Sort(format!(
                "`{var}` at {pos} is not a number variable (number variables are lower-case)"
            )));
        }
        self.expect(".")?;
        let body = self.formula()?;
        Ok(build(var, Box::new(body)))
    }

    fn atom(&mut self) -> Result<SoFormula> {
        let start = self.pos;
        // `X = Y` between set variables, checked before term parsing.
        let save = self.pos;
        if let Ok(first) = self.ident() {
            if is_set_var(&first) {
                if self.eat("=") {
                    let pos = self.pos;
                    let second = self.ident()?;
                    if !is_set_var(&second) {
                        return Err(Error::Sort(format!(
                            "`{second}` at {pos} is not a set variable"
                        )));
                    }
                    return Ok(SoFormula::EqSet(first, second));
                }
                return Err(Error::Sort(format!(
                    "set variable `{first}` at {start} can only appear in `in` or `=`"
                )));
            }
        }
        self.pos = save;
        let t = self.term()?;
        if self.eat("in") {
            let pos = self.pos;
            let x = self.ident()?;
            if !is_set_var(&x) {
                return Err(Error::Sort(format!(
                    "`{x}` at {pos} is not a set variable (set variables are capitalized)"
                )));
            }
            Ok(SoFormula::InSet(t, x))
        } else if self.eat("=") {
            Ok(SoFormula::EqNum(t, self.term()?))
        } else {
            Err(Error::parse(self.pos, "expected `in` or `=`"))
        }
    }

    fn term(&mut self) -> Result<NumTerm> {
        let mut acc = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = NumTerm::Add(Box::new(acc), Box::new(self.product()?));
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<NumTerm> {
        let mut acc = self.term_atom()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = NumTerm::Mul(Box::new(acc), Box::new(self.term_atom()?));
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> Result<NumTerm> {
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(NumTerm::Zero)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(NumTerm::One)
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            _ => {
                let pos = self.pos;
                let v = self.ident()?;
                if is_set_var(&v) {
                    return Err(Error::Sort(format!(
                        "set variable `{v}` at {pos} cannot appear in a number term"
                    )));
                }
                Ok(NumTerm::Var(v))
            }
        }
    }
}

fn is_set_var(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Renders a translated formula; `Coded` atoms print as `(a)_t != 0`.
pub fn format_k(f: &KFormula) -> String {
    let mut out = String::new();
    write_k(f, 0, &mut out);
    out
}

fn k_prec(f: &KFormula) -> u8 {
    match f {
        KFormula::ExistsNum(..) => 0,
        KFormula::Or(..) => 2,
        KFormula::And(..) => 3,
        KFormula::Not(..) => 4,
        _ => 5,
    }
}

fn write_k(f: &KFormula, min: u8, out: &mut String) {
    use std::fmt::Write as _;
    let wrap = k_prec(f) < min;
    if wrap {
        out.push('(');
    }
    match f {
        KFormula::EqNum(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        KFormula::Standard(t) => {
            let simple = matches!(t, NumTerm::Zero | NumTerm::One | NumTerm::Var(_));
            if simple {
                let _ = write!(out, "K({t})");
            } else {
                let _ = write!(out, "K(({t}))");
            }
        }
        KFormula::Coded { code, elem } => {
            let simple = matches!(elem, NumTerm::Zero | NumTerm::One | NumTerm::Var(_));
            if simple {
                let _ = write!(out, "({code})_{elem} != 0");
            } else {
                let _ = write!(out, "({code})_({elem}) != 0");
            }
        }
        KFormula::Not(a) => {
            out.push('!');
            write_k(a, 4, out);
        }
        KFormula::And(a, b) => {
            write_k(a, 3, out);
            out.push_str(" & ");
            write_k(b, 4, out);
        }
        KFormula::Or(a, b) => {
            write_k(a, 2, out);
            out.push_str(" | ");
            write_k(b, 3, out);
        }
        KFormula::ExistsNum(v, a) => {
            let _ = write!(out, "E {v}. ");
            write_k(a, 0, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

impl fmt::Display for KFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_k(self))
    }
}

impl fmt::Display for SoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoFormula::EqNum(a, b) => write!(f, "{a} = {b}"),
            SoFormula::InSet(t, x) => write!(f, "{t} in {x}"),
            SoFormula::EqSet(x, y) => write!(f, "{x} = {y}"),
            SoFormula::Not(a) => write!(f, "!({a})"),
            SoFormula::Or(a, b) => write!(f, "({a}) | ({b})"),
            SoFormula::And(a, b) => write!(f, "({a}) & ({b})"),
            SoFormula::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            SoFormula::ExistsNum(v, a) => write!(f, "E {v}. {a}"),
            SoFormula::ExistsSet(x, a) => write!(f, "EX {x}. {a}"),
            SoFormula::ForallNum(v, a) => write!(f, "A {v}. {a}"),
            SoFormula::ForallSet(x, a) => write!(f, "AX {x}. {a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_clause() {
        let theta = parse_so("t in X").unwrap();
        let k = k_translate(&theta).unwrap();
        assert_eq!(format_k(&k), "K(t) & (x_X)_t != 0");
    }

    #[test]
    fn composed_quantifier_clauses() {
        let theta = parse_so("EX X. E n. n in X").unwrap();
        let k = k_translate(&theta).unwrap();
        assert_eq!(format_k(&k), "E x_X. E n. K(n) & (x_X)_n != 0");
    }

    #[test]
    fn negation_commutes() {
        let theta = parse_so("!(n in X)").unwrap();
        let inner = parse_so("n in X").unwrap();
        assert_eq!(
            k_translate(&theta).unwrap(),
            KFormula::Not(Box::new(k_translate(&inner).unwrap()))
        );
    }

    #[test]
    fn disjunction_commutes() {
        let a = parse_so("n in X").unwrap();
        let b = parse_so("n = 0").unwrap();
        let or = SoFormula::Or(Box::new(a.clone()), Box::new(b.clone()));
        assert_eq!(
            k_translate(&or).unwrap(),
            KFormula::Or(
                Box::new(k_translate(&a).unwrap()),
                Box::new(k_translate(&b).unwrap())
            )
        );
    }

    #[test]
    fn number_equality_is_untouched() {
        let theta = parse_so("n + 1 = m * m").unwrap();
        assert_eq!(format_k(&k_translate(&theta).unwrap()), "n + 1 = m * m");
    }

    #[test]
    fn set_equality_expands_extensionally() {
        let theta = parse_so("X = Y").unwrap();
        let k = format_k(&k_translate(&theta).unwrap());
        assert!(k.contains("(x_X)_v0"), "{k}");
        assert!(k.contains("(x_Y)_v0"), "{k}");
        assert!(k.starts_with('!'), "{k}");
    }

    #[test]
    fn sort_errors() {
        assert!(matches!(parse_so("n in x"), Err(Error::Sort(_))));
        assert!(matches!(parse_so("E X. X in Y"), Err(Error::Sort(_))));
        assert!(matches!(parse_so("EX n. 0 in n"), Err(Error::Sort(_))));
        assert!(matches!(parse_so("X = n"), Err(Error::Sort(_))));
    }

    #[test]
    fn namespace_collision_is_detected() {
        // Programmatic construction: the parser's identifiers cannot
        // contain an underscore, but the API can.
        let theta = SoFormula::And(
            Box::new(SoFormula::InSet(NumTerm::Var("x_X".into()), "X".into())),
            Box::new(SoFormula::EqNum(NumTerm::Var("x_X".into()), NumTerm::Zero)),
        );
        assert!(matches!(
            k_translate(&theta),
            Err(Error::NamespaceCollision(_))
        ));
    }

    #[test]
    fn sugar_desugars_before_translation() {
        let theta = parse_so("A n. n in X -> n in Y").unwrap();
        let k = k_translate(&theta).unwrap();
        let text = format_k(&k);
        assert!(text.starts_with("!(E n. "), "{text}");
        assert!(!format!("{k:?}").contains("Implies"));
    }
}
