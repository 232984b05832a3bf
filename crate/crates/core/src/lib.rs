//! Exact laboratory for multilinear multiplicative character sums over
//! small prime fields.
//!
//! The crate evaluates sums such as
//! `S = sum alpha_a beta_{b,c,d} chi(a + b + cd)` by two independent routes,
//! computes the counting profiles and incidence counts they collapse onto,
//! and checks every closed-form bound against the exact values.

pub mod accum;
pub mod bounds;
pub mod character;
pub mod error;
pub mod experiment;
pub mod field;
pub mod profiles;
pub mod setgen;
pub mod sums;

pub use character::{eval_add_char, CharacterValue, MultChar};
pub use error::{Error, Result};
pub use field::PrimeField;
pub use profiles::{IncidenceCount, IncidenceKind, LambdaProfile, MapKind, WeightedProfile};
pub use setgen::{FSet, SetSpec, SetSystem, WeightSpec, WeightSystem};
pub use sums::{SumInstance, SumValue, Variant};
