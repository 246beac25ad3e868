//! Verification of CTL+FO properties of integer transition systems.
//!
//! A formula is compiled into forall-exists Horn constraints with
//! well-foundedness obligations ([`gen`]), which are then solved either by
//! grounding over a finite box ([`horn::ground`], [`solver`]) or by a
//! template-driven Skolemization loop ([`cegar`]). An explicit-state model
//! checker ([`mc`]) decides the same question directly and serves as a
//! cross-check.

mod syntax;

pub mod cegar;
pub mod formula;
pub mod gen;
pub mod harness;
pub mod horn;
pub mod logic;
pub mod mc;
pub mod solver;
pub mod system;

pub use syntax::{ParseError, Pos};
