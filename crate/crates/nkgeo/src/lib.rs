//! Null-Kähler geometry toolkit.

pub mod expr;
pub mod geometry;
pub mod nullkahler;
pub mod report;
pub mod pde;
pub mod sl2;
pub mod ode;
pub mod isomonodromy;
pub mod painleve;
pub mod cli;
