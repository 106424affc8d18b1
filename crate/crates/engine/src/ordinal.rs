//! Ordinal arithmetic below epsilon-zero in Cantor normal form.
//!
//! An ordinal is kept as its Cantor normal form
//! `w^{e_1}*n_1 + ... + w^{e_k}*n_k` with strictly decreasing exponents
//! `e_1 > ... > e_k` (themselves ordinals) and coefficients `n_i >= 1`.
//! The empty sum is 0. Because the representation is a finite tree, every
//! representable value is below epsilon-zero; no numeric depth cap is needed.
//!
//! Only the operations the rest of the engine needs are provided: comparison,
//! addition, successor/limit classification, the explicit fundamental
//! sequences `{lambda}(i)` for limit ordinals, and a cofinality search.
//! Multiplication and exponentiation are deliberately absent.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// One CNF term `w^exponent * coefficient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CnfTerm {
    exponent: Ordinal,
    coefficient: BigUint,
}

/// An ordinal below epsilon-zero in Cantor normal form.
///
/// Displayed with right multiplication (`w^2*3` for three copies of `w^2`),
/// which denotes the same ordinal as the left-coefficient notation `3 w^2`
/// sometimes used for "w^2 taken 3 times".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<CnfTerm>,
}

/// The three mutually exclusive kinds of ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Zero,
    /// A successor, carrying its predecessor.
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    /// The ordinal 0 (the empty sum).
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    /// The first infinite ordinal `w`.
    pub fn omega() -> Self {
        Ordinal::term(Ordinal::from(1u64), 1u64)
    }

    /// A finite ordinal.
    pub fn from_nat(n: BigUint) -> Self {
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![CnfTerm {
                    exponent: Ordinal::zero(),
                    coefficient: n,
                }],
            }
        }
    }

    /// The single term `w^exponent * coefficient`; zero if the coefficient is 0.
    pub fn term(exponent: Ordinal, coefficient: impl Into<BigUint>) -> Self {
        let coefficient = coefficient.into();
        if coefficient.is_zero() {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![CnfTerm {
                exponent,
                coefficient,
            }],
        }
    }

    /// `w^exponent`.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Ordinal::term(exponent, 1u64)
    }

    /// Builds the normal form for a formal multiset of terms: terms are
    /// sorted by descending exponent and equal exponents are merged. This is
    /// *not* ordinal addition (no absorption happens); use [`Ordinal::add`]
    /// to evaluate a left-to-right sum.
    pub fn cnf(terms: impl IntoIterator<Item = (Ordinal, BigUint)>) -> Self {
        let mut terms: Vec<CnfTerm> = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponent, coefficient)| CnfTerm {
                exponent,
                coefficient,
            })
            .collect();
        terms.sort_by(|a, b| b.exponent.cmp(&a.exponent));
        let mut merged: Vec<CnfTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponent == t.exponent => {
                    last.coefficient += t.coefficient;
                }
                _ => merged.push(t),
            }
        }
        Ordinal { terms: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The finite value, when the ordinal is below `w`.
    pub fn as_nat(&self) -> Option<BigUint> {
        match self.terms.as_slice() {
            [] => Some(BigUint::zero()),
            [t] if t.exponent.is_zero() => Some(t.coefficient.clone()),
            _ => None,
        }
    }

    /// Total order on ordinals: leading terms are compared by exponent,
    /// then coefficient; on a tie the comparison moves to the next term,
    /// and a proper prefix is smaller.
    pub fn compare(&self, other: &Ordinal) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.exponent.compare(&b.exponent) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.coefficient.cmp(&b.coefficient) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }

    /// Ordinal addition. Terms of `self` with exponent below the leading
    /// exponent of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(first) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<CnfTerm> = self
            .terms
            .iter()
            .take_while(|t| t.exponent > first.exponent)
            .cloned()
            .collect();
        let mut rest = rhs.terms.iter();
        // Merge the boundary term when the exponents coincide.
        let boundary = self.terms.iter().find(|t| t.exponent == first.exponent);
        if let Some(t) = boundary {
            terms.push(CnfTerm {
                exponent: t.exponent.clone(),
                coefficient: &t.coefficient + &first.coefficient,
            });
            rest.next();
        }
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    /// `self + n` for a natural number.
    pub fn add_nat(&self, n: u64) -> Ordinal {
        self.add(&Ordinal::from(n))
    }

    /// Zero / successor / limit classification. The ordinal is a limit
    /// exactly when the last exponent is nonzero; for a successor the
    /// returned predecessor is this ordinal with its final unit removed.
    pub fn classify(&self) -> Classification {
        let Some(last) = self.terms.last() else {
            return Classification::Zero;
        };
        if !last.exponent.is_zero() {
            return Classification::Limit;
        }
        let mut pred = self.clone();
        let tail = pred.terms.last_mut().unwrap();
        if tail.coefficient.is_one() {
            pred.terms.pop();
        } else {
            tail.coefficient -= BigUint::one();
        }
        Classification::Successor(pred)
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.classify(), Classification::Limit)
    }

    /// The explicit fundamental sequence `{lambda}(i)` of a limit ordinal.
    ///
    /// Writing `lambda = head + w^{e}*n` with `e` the last (nonzero)
    /// exponent, the `i`th member is
    ///
    /// * `head + w^{e}*(n-1) + w^{{e}(i)}` when `e` is a limit, and
    /// * `head + w^{e}*(n-1) + w^{xi}*i` when `e = xi + 1`.
    ///
    /// The sequence is strictly increasing and cofinal in `lambda`; in
    /// particular `{w}(i) = i`.
    pub fn fund_seq(&self, i: u64) -> Result<Ordinal> {
        let Some(last) = self.terms.last() else {
            return Err(Error::NotLimit(self.to_string()));
        };
        match last.exponent.classify() {
            Classification::Zero => Err(Error::NotLimit(self.to_string())),
            Classification::Successor(xi) => {
                let mut out = self.decrement_last();
                if i > 0 {
                    out = out.add(&Ordinal::term(xi, i));
                }
                Ok(out)
            }
            Classification::Limit => {
                let inner = last.exponent.fund_seq(i)?;
                Ok(self.decrement_last().add(&Ordinal::omega_pow(inner)))
            }
        }
    }

    /// Removes one copy of the last term. Only meaningful on nonzero ordinals.
    fn decrement_last(&self) -> Ordinal {
        let mut out = self.clone();
        let last = out.terms.last_mut().expect("nonzero ordinal");
        if last.coefficient.is_one() {
            out.terms.pop();
        } else {
            last.coefficient -= BigUint::one();
        }
        out
    }

    /// The least `i` with `{lambda}(i) >= beta`, for `beta < lambda`.
    /// Existence witnesses that the fundamental sequence is cofinal.
    pub fn index_above(&self, beta: &Ordinal) -> Result<u64> {
        if beta >= self {
            return Err(Error::BoundNotBelow {
                beta: beta.to_string(),
                lambda: self.to_string(),
            });
        }
        if &self.fund_seq(0)? >= beta {
            return Ok(0);
        }
        // Exponential search for an upper index, then binary search for the
        // least one; the sequence is strictly increasing.
        let mut lo = 0u64; // fund_seq(lo) < beta
        let mut hi = 1u64;
        while &self.fund_seq(hi)? < beta {
            lo = hi;
            hi = hi.checked_mul(2).expect("cofinality index overflow");
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if &self.fund_seq(mid)? < beta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::from_nat(BigUint::from(n))
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            if t.exponent.as_nat().map_or(false, |n| n.is_one()) {
                f.write_str("w")?;
            } else if let Some(n) = t.exponent.as_nat() {
                write!(f, "w^{}", n)?;
            } else {
                write!(f, "w^({})", t.exponent)?;
            }
            if !t.coefficient.is_one() {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_ordinal(s)
    }
}

/// Parses the grammar `0 | sum`, `sum := term ("+" term)*`,
/// `term := "w" ["^" "(" sum ")" | "^" nat] ["*" nat] | nat`.
/// Whitespace is insignificant. Sums are evaluated left to right with
/// ordinal addition, so non-canonical input like `w + w^2` denotes `w^2`.
pub fn parse_ordinal(text: &str) -> Result<Ordinal> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let value = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::parse(p.pos, "trailing input"));
    }
    Ok(value)
}

/// Canonical text form; the inverse of [`parse_ordinal`] on values.
pub fn format_ordinal(o: &Ordinal) -> String {
    o.to_string()
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn nat(&mut self) -> Result<BigUint> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::parse(start, "expected a natural number"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(digits.parse().unwrap())
    }

    fn sum(&mut self) -> Result<Ordinal> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') {
                    if self.eat(b'(') {
                        let e = self.sum()?;
                        self.expect(b')')?;
                        e
                    } else {
                        Ordinal::from_nat(self.nat()?)
                    }
                } else {
                    Ordinal::from(1u64)
                };
                let coefficient = if self.eat(b'*') {
                    self.nat()?
                } else {
                    BigUint::one()
                };
                Ok(Ordinal::term(exponent, coefficient))
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::from_nat(self.nat()?)),
            _ => Err(Error::parse(self.pos, "expected `w` or a natural number")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> Ordinal {
        parse_ordinal(s).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(ord("w").compare(&ord("2")), Ordering::Greater);
        assert_eq!(ord("0").compare(&ord("0")), Ordering::Equal);
        // Frozen from the leading-term rule: exponents 2 vs 1.
        assert_eq!(ord("w^2 + w").compare(&ord("w*5")), Ordering::Greater);
    }

    #[test]
    fn add_examples() {
        assert_eq!(ord("w").add(&ord("1")), ord("w + 1"));
        assert_eq!(ord("1").add(&ord("w")), ord("w"));
        // Absorption merges the boundary term: (w*2 + 3) + w = w*3.
        assert_eq!(ord("w*2 + 3").add(&ord("w")), ord("w*3"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(ord("0").classify(), Classification::Zero);
        assert_eq!(ord("w + 1").classify(), Classification::Successor(ord("w")));
        assert_eq!(ord("w^2").classify(), Classification::Limit);
        assert_eq!(ord("3").classify(), Classification::Successor(ord("2")));
    }

    #[test]
    fn fund_seq_of_omega_is_identity() {
        for k in [0u64, 1, 2, 7, 100] {
            assert_eq!(ord("w").fund_seq(k).unwrap(), Ordinal::from(k));
        }
    }

    #[test]
    fn fund_seq_successor_exponent_cases() {
        // {w^2}(3): last exponent 2 = 1+1, so w^2 steps down to w*3.
        assert_eq!(ord("w^2").fund_seq(3).unwrap(), ord("w*3"));
        // {w*2}(3): one copy of w is kept, the last becomes 3.
        assert_eq!(ord("w*2").fund_seq(3).unwrap(), ord("w + 3"));
        assert_eq!(ord("w*2").fund_seq(0).unwrap(), ord("w"));
    }

    #[test]
    fn fund_seq_limit_exponent_case() {
        // {w^w}(i) = w^i.
        assert_eq!(ord("w^(w)").fund_seq(3).unwrap(), ord("w^3"));
        assert_eq!(ord("w^(w)").fund_seq(0).unwrap(), ord("1"));
        // {w^(w*2)}(i) = w^(w + i).
        assert_eq!(ord("w^(w*2)").fund_seq(4).unwrap(), ord("w^(w + 4)"));
    }

    #[test]
    fn fund_seq_rejects_non_limits() {
        assert!(ord("0").fund_seq(1).is_err());
        assert!(ord("w + 1").fund_seq(1).is_err());
    }

    #[test]
    fn index_above_examples() {
        assert_eq!(ord("w").index_above(&ord("7")).unwrap(), 7);
        assert_eq!(ord("w^2").index_above(&ord("w*3")).unwrap(), 3);
        assert_eq!(ord("w").index_above(&ord("0")).unwrap(), 0);
        assert!(ord("w").index_above(&ord("w")).is_err());
        assert!(ord("w").index_above(&ord("w + 1")).is_err());
    }

    #[test]
    fn parse_format_round_trip() {
        for s in ["w^2*3 + w + 4", "0", "w^(w)", "w", "17", "w^(w^(w) + 1)*2 + 5"] {
            assert_eq!(format_ordinal(&ord(s)), s);
        }
    }

    #[test]
    fn parse_normalizes_via_addition() {
        assert_eq!(ord("w + w^2"), ord("w^2"));
        assert_eq!(ord("w*0"), ord("0"));
        assert_eq!(ord("w^0"), ord("1"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_ordinal("w^") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_ordinal("w +").is_err());
        assert!(parse_ordinal("x").is_err());
        assert!(parse_ordinal("w^(w").is_err());
    }
}
