//! Partition-function approximation for binary planar graphical models.
//!
//! Belief propagation gives a first estimate `Z_bp`; the loop series then
//! corrects it. On planar graphs the sum over 2-regular loops (`z_empty`) is a
//! single Pfaffian, and the full series is a finite sum of such Pfaffians, one
//! per even set of degree-3 nodes.

pub mod bp;
pub mod experiment;
pub mod gen;
pub mod model;
pub mod numeric;
pub mod pfaffian;
pub mod planar;
pub mod series;

pub use numeric::SignedLog;
