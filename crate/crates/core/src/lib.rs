mod error;
mod linalg;

pub mod cat;
pub mod conditional;
pub mod experiment;
pub mod fock;
pub mod oracle;
pub mod ordering;
pub mod phase_space;
pub mod poly;
pub mod selftest;

pub use error::{Error, Result};
pub use linalg::CMatrix;
