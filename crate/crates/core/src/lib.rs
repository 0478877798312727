//! Integrated scalar/vector field visualization on regular grids.
//!
//! The pipeline runs in four stages over a shared [`volume::VolumeGrid`]:
//!
//! 1. critical points of the scalar and vector fields ([`topology`]),
//! 2. semitransparent isosurfaces ([`isosurface`]),
//! 3. a large pool of candidate streamlines ([`tracing`]),
//! 4. view-dependent scoring by projected-length entropy with isosurface
//!    occlusion ([`scoring`]) and budgeted selection ([`selection`]).

pub mod error;
pub mod isosurface;
pub mod scoring;
pub mod selection;
pub mod topology;
pub mod tracing;
pub mod volume;

pub use error::{Error, Result};

/// World-space vector type used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
