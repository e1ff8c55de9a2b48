//! Ideal triangulations of punctured surfaces, flips, normal multicurves,
//! pinching along multicurves, shear coordinates and trace functions.

pub mod canonical;
pub mod curves;
pub mod error;
pub mod fixtures;
pub mod flip;
pub mod pinch;
pub mod shear;
pub mod trace;
pub mod triangulation;

pub use error::{Error, Result};
pub use triangulation::{Corner, EdgeId, IdealTriangulation, Slot};
