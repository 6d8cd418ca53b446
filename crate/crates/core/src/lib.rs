pub mod arc;
pub mod bits;
pub mod cli;
pub mod code;
pub mod constructions;
pub mod extension;
pub mod field;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod table;
