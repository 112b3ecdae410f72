//! Positioning of two nested planar interfaces in a polyhedral cell.
//!
//! Given a cell, a primary normal and fraction, and a secondary normal and
//! fraction, [`positioning::position_sequential`] places the primary plane on
//! the whole cell and the secondary plane in what the primary phase leaves
//! over. Volumes come from face sums over truncated faces, so every
//! evaluation also yields the first three derivatives.

pub mod cube;
pub mod geometry;
pub mod off;
pub mod oracle;
pub mod plane;
pub mod positioning;
pub mod shapes;
pub mod truncation;
pub mod volume;
