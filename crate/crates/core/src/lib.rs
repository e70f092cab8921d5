//! Exact computation of degree sets for products of low-genus curves.
//!
//! A degree set of a variety is the set of `d` for which degree-`d` points
//! are Zariski dense. This crate encodes such sets lazily ([`setalg`]), does
//! the exact polynomial arithmetic they rest on ([`polyarith`]), models
//! hyperelliptic and elliptic curves ([`curvemodel`]), decides local
//! solvability over tame p-adic fields ([`localsolve`]), computes root numbers
//! ([`rootnumber`]) and combines all of it in a traced rule engine
//! ([`boundrules`]).

pub mod boundrules;
pub mod curvemodel;
pub mod exec;
pub mod fixtures;
pub mod localsolve;
pub mod polyarith;
pub mod rootnumber;
pub mod setalg;

pub use exec::Exec;
pub use setalg::DegreeSet;
