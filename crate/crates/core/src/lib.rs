//! Numerical tools for Carleson embeddings of Hardy spaces: dyadic geometry
//! of the disk, measures and their box masses, Hardy space discretizations,
//! summing norm estimates, embedding criteria and composition operators.

pub mod composition;
pub mod constructions;
pub mod criteria;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hardy;
pub mod measures;
pub mod numerics;
pub mod schema;
pub mod summing;

pub use error::{Error, Result};
