pub mod expr;
pub mod exterior;
pub mod structures;
pub mod brackets;
pub mod dynamics;
pub mod nonholonomic;
pub mod hj;
