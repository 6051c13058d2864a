#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod mixing;
pub mod objectives;
pub mod point;
pub mod rng;
pub mod solvers;
