pub mod algebras;
pub mod brst;
pub mod coeff;
pub mod engine;
pub mod expr;
pub mod linalg;
pub mod states;
pub mod syntax;
