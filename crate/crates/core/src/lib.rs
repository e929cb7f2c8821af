//! Exact Chow–Künneth decompositions for varieties with finite-rank Chow
//! groups: graded algebras, blow-up and projective-bundle builders,
//! correspondences, projector constructions and the Hilbert-scheme pipelines.

pub mod error;
pub mod exactalg;
pub mod variety;
pub mod corresp;
pub mod ckd;
pub mod report;
pub mod hilbert;
pub mod cli;

pub use error::{Error, Result};
pub use exactalg::{Rat, Scalar};
