pub mod cli;
pub mod convention;
pub mod error;
pub mod fields;
pub mod metric;
pub mod operators;
pub mod quadrature;
pub mod spaces;
pub mod verify;
