//! Core algorithms for reasoning about discrete linear Kripke models.
//!
//! Everything here is pure and allocation-backed only: the crate is
//! `no_std` and depends on `alloc`. IO, file formats and the command line
//! live in the companion `kf` crate.
//!
//! The modules build on each other bottom-up:
//!
//! - [`syntax`]: formulas over a signature plus a countable pool of Henkin
//!   constants, the ASCII grammar, the sentence enumeration and the stage
//!   schedule.
//! - [`semantics`]: finite Kripke models and lasso presentations of
//!   ω-type linear models, with the inductive truth definition.
//! - [`oracle`]: decides "φ holds in every discrete linear model of T" by
//!   bounded countermodel search over lassos.
//! - [`fkd`]: linear finite Kripke diagrams, their representing formulas
//!   and the consistency test.
//! - [`henkin`]: the stage machine that grows a diagram into a decidable
//!   linear model, and the truth-query procedure on the limit.
#![no_std]

extern crate alloc;

pub mod fkd;
pub mod henkin;
pub mod oracle;
pub mod semantics;
pub mod syntax;

pub use fkd::{LinearFkd, WitnessMap, WorldId};
pub use henkin::{ConstructedModel, ConstructionConfig, ConstructionState, Placement};
pub use oracle::{Oracle, OracleConfig, OracleVerdict, SatVerdict, SearchBounds, Theory};
pub use semantics::{KripkeModel, LassoModel, LassoPos};
pub use syntax::{Formula, Kind, Signature, Term};

#[cfg(test)]
mod testgen;
