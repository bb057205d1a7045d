//! Axiomatic Kakeya problems: settings, tubes, covering tools, axiom
//! estimators, Kakeya-set diagnostics and the arithmetic sum-difference
//! machinery.

pub mod arith;
pub mod axiomlab;
pub mod carnot;
pub mod covers;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod kakeyalab;
pub mod linalg;
pub mod rng;
pub mod settings;

pub use error::{KakeyaError, Result};
