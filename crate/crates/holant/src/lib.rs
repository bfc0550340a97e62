//! Exact signature algebra, counting engines and complexity classifier for
//! the planar eight-vertex model `Pl-Holant(NEQ2 | f)`.

pub mod field;
pub mod linalg;
pub mod signature;
pub mod grid;
pub mod holo;
pub mod gadget;
pub mod eval;
pub mod sample;
pub mod lattice;
pub mod classify;
pub mod acceptance;
