//! Exact spanning sets, Sherali-Adams style relaxations and pitch
//! certificates for set cover and packing problems over {0,1}^n.

pub mod certify;
pub mod cgtools;
pub mod delta;
pub mod error;
pub mod instances;
pub mod json;
pub mod limits;
pub mod lpcore;
pub mod poly;
pub mod rat;
pub mod relax;
pub mod simplex;
pub mod spanning;
pub mod textspec;
pub mod varset;

pub use delta::DeltaStructured;
pub use error::{Error, Result};
pub use instances::{
    CoverInstance, Instance, KnapsackInstance, LinearInequality, LinearSystem, PackingInstance,
    PackingRow, Sense,
};
pub use limits::Limits;
pub use poly::{delta, MultilinearPoly, PartialAssignment};
pub use rat::Rat;
pub use varset::VarSet;
