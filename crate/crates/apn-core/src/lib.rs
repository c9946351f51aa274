//! Algebraic Petri nets with term-valued tokens, homogeneous linear
//! equations over cyclic coefficient groups, and a decision procedure for
//! transition stability, together with brute-force oracles and a Minsky
//! machine encoding.

pub mod equation;
pub mod gen;
pub mod group;
pub mod minsky;
pub mod net;
pub mod oracle;
pub mod poly;
pub mod stability;
pub mod term;
pub mod unify;
