pub mod cli;
pub mod constraints;
pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod lagrangian;
pub mod noether;
pub mod symcore;
pub mod tangentgeo;

pub use symcore::{ex, parse, Expr, Sampler};
