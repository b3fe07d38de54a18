//! Exact symbolic toolkit for constraint objects and their reductions:
//! index sets, finite-dimensional algebras and modules, flat constraint
//! manifolds with polynomial Cartan calculus, Lie algebroids and graph-type
//! Dirac structures.

pub mod algd;
mod alt;
pub mod calg;
pub mod cartan;
pub mod cgeo;
pub mod cindex;
pub mod dirac;
pub mod exact;
pub mod gen;
pub mod par;
pub mod poly;
pub mod report;
pub mod selftest;
