//! Walks on countable ordinals, oscillation maps, and the circle-group
//! constructions built from them, at finite and certified scale.

pub mod combinatorics;
pub mod exec;
pub mod lab;
pub mod ordinal;
pub mod torus;
pub mod walks;

pub use exec::Exec;
pub use ordinal::Ordinal;
