//! Automated cephalometric landmarking and facial segmentation for 3D
//! surface meshes.
//!
//! The library implements a four-stage workflow for locating ten facial
//! landmarks (exocanthions, endocanthions, nasion, nose tip, alares,
//! cheilions) on a triangle mesh of a face:
//!
//! 1. **Rough prediction** — a DiffusionNet instance-segmentation model
//!    running on heat-kernel-signature features of the (decimated) mesh
//!    marks vertices near each landmark; weighted-centroid post-processing
//!    with clustering and a midsagittal plane turns activations into ten
//!    named points ([`extract`]).
//! 2. **Realignment** — an anatomical reference frame is built from the
//!    rough landmarks and the mesh is rigidly moved into it ([`align`]).
//! 3. **Facial segmentation** — a face template is registered to the
//!    aligned mesh (rigid + non-rigid ICP, [`register`]) and everything
//!    farther than a cutoff from the fitted template is cropped away.
//! 4. **Refined prediction** — a second DiffusionNet on XYZ features of
//!    the segmented mesh predicts each landmark in its own channel.
//!
//! Supporting modules provide mesh I/O and quadric decimation ([`mesh`]),
//! intrinsic surface operators ([`spectral`]), the network and training
//! loop ([`nn`]), an evaluation harness ([`eval`]), a parametric
//! synthetic-face generator with analytic ground truth ([`synth`]), and
//! pipeline orchestration ([`pipeline`]).
//!
//! All geometry is in millimeters; all numerics are `f64`.

pub mod align;
pub mod eval;
pub mod extract;
pub mod geom;
pub mod landmarks;
pub mod mesh;
pub mod nn;
pub mod pipeline;
pub mod register;
pub mod spectral;
pub mod synth;

pub use landmarks::{LandmarkName, LandmarkSet};
pub use mesh::{TriangleMesh, VertexMap};

/// 3D point in millimeters.
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector in millimeters.
pub type Vec3 = nalgebra::Vector3<f64>;
