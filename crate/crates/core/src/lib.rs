//! Refinement type checking with implicit function and implicit pair types.

pub mod ast;
pub mod cgen;
pub mod driver;
pub mod ehc;
pub mod elab;
pub mod name;
pub mod pred;
pub mod qe;
pub mod smt;
pub mod solver;
pub mod syntax;
