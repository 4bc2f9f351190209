//! Multiresolution raster analysis over grayscale images.
//!
//! The crate decomposes an image into an executable hierarchical
//! description: a dyadic pyramid is built bottom-up, the coarse top level
//! is segmented into labeled regions, and the labeling is pushed back down
//! level by level, refined against each finer image until the original
//! resolution is reached. Alongside the hierarchy it computes per-pixel
//! local information measures and the prominence/edge maps derived from
//! them, plus a per-level registry of region descriptors.
//!
//! The crate is `no_std` (with `alloc`) and does no IO; file formats and
//! the command line live in the companion `pixinfo-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod grid;
pub mod lowlevel;
pub mod objects;
pub mod pyramid;
pub mod segmentation;

pub use grid::{GridError, ImageGrid, Neighborhood3x3};
pub use lowlevel::{
    CumulativeHistogram, EdgeMap, EdgeMark, InfoMaps, LowLevelError, StatusMap, Tier, TierMap,
};
pub use objects::{ObjectList, ObjectRecord, Relation, RelationKind};
pub use pyramid::{Pyramid, PyramidError};
pub use segmentation::{LabelMap, LevelSegmentation, ResidualMap, SegmentError};
