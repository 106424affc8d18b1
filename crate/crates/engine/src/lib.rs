//! A symbolic engine for the proof theory of omitting a type.
//!
//! The centerpiece is a closure calculus: given a first-order theory `T`
//! over a monadic signature and a type `p(x)`, the engine iterates the
//! rule "derive `!E x. phi(x)` once `A x. (phi(x) -> p_i(x))` is entailed
//! for every member `p_i` of the type", tracking at which step each
//! refutation enters. The step at which the iteration closes is the rank
//! of `(T, p)`; theories generated from well-founded trees realize every
//! finite rank exactly, with the tree's node ranks as the entry ledger.
//!
//! Supporting subsystems: Cantor-normal-form ordinals with explicit
//! fundamental sequences ([`ordinal`]), well-founded trees and the
//! canonical rank-`alpha` trees ([`tree`]), a decision procedure for
//! monadic first-order logic with counting quantifiers ([`logic`]),
//! finitely presented axiom schemas ([`schematic`]), the concrete theory
//! families ([`families`]), and a syntactic translation of second-order
//! arithmetic into first-order arithmetic with a standardness predicate
//! ([`ktranslate`]).

pub mod closure;
pub mod error;
pub mod families;
pub mod ktranslate;
pub mod logic;
pub mod oracle;
pub mod ordinal;
pub mod schematic;
pub mod tree;

pub use error::{Error, Result};
