//! Population rate equations for sequential and direct multiphoton multiple
//! ionization of neon in intense XUV pulses, with chaotic-light ensembles and
//! focal-volume averaging.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod ensemble;
pub mod error;
pub mod interp;
pub mod kinetics;
pub mod model;
pub mod pulse;
pub mod quad;
pub mod rng;
pub mod volume;

pub use error::{Error, Result};
