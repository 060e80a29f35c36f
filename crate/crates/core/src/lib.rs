//! Tuplix calculus over exact meadow arithmetic: terms, canonical forms,
//! elimination of derived operators and the standard model.

pub mod cli;
pub mod dataterm;
pub mod dsl;
pub mod eliminate;
pub mod meadow;
pub mod model;
pub mod normalize;
pub mod tuplix;
