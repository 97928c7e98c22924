//! Normal pairs of graphs embedded on closed surfaces.
//!
//! The crate builds the common refinement of two embedded graphs, computes
//! the width of the pair with a shortest-path certificate, runs the
//! well-formed walk, checks the Euler characteristic accounting, and reduces
//! 4-prismatoid widths to pairs of geodesic maps on the sphere.

pub mod accounting;
pub mod generators;
pub mod geodesic;
pub mod overlay;
pub mod parallel;
pub mod surface_map;
pub mod union_find;
pub mod width;

pub use overlay::{build_overlay, Crossing, Overlay, OverlayError, PairInput, Sign, VertexRole};
pub use surface_map::{CombinatorialMap, EdgeEnd, MapError, Surface};
pub use width::{Width, WidthResult};

/// Version of every JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;
