//! Equilibrium analysis for threshold participation games.
//!
//! A population of `n` players decides each epoch whether to engage with a
//! protocol. Engaged players are independently selected (probability `q`, or
//! `q_i` per player) to contribute; progress is made when at least `k`
//! selected players complete their tasks. Four reward schemes are covered:
//!
//! * `Basic` - eligible contributors are paid when progress is made;
//! * `Retraction` - every eligible declared participant is paid, so players
//!   may declare and then skip their tasks;
//! * `UniversalBasic` - every declared participant is paid, eligible or not;
//! * `UniversalRetraction` - universal payments combined with retraction.
//!
//! The crate provides exact-rational utilities and pure-equilibrium checks
//! ([`game`], [`equilibrium`]), fast structural finders for each scheme
//! ([`structure`]), minimum-reward calibration and expenditure comparisons
//! ([`calibration`]), and seeded Monte Carlo plus best-response dynamics
//! ([`simulation`]).

pub mod calibration;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod numeric;
pub mod prob;
pub mod simulation;
pub mod structure;

pub use error::Error;
pub use numeric::{NumericMode, Rational};
