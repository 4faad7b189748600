//! Pseudo-LiDAR refinement guided by a single-plane laser scan.
//!
//! Depth images are back-projected into point clouds, constrained by features
//! built from the laser scan and refined by a pair of small MLPs trained
//! against a local map of recent range sweeps. All numeric code is generic
//! over [`Real`], implemented for `f32` and `f64`.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod io;
pub mod laser;
pub mod local_map;
pub mod metrics;
pub mod refinement;
pub mod scalar;
pub mod spatial;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    backproject_depth, compose, invert, project_point, transform_point, CameraModel, DepthImage,
    Mat3, PointCloud, Pose, Projection, Vec3,
};
pub use laser::{build_3d_mask, build_boundaries, BoundarySet, LaserScan2D, Mask};
pub use local_map::{build_local_map, push_scan, LocalMap, ScanBuffer};
pub use scalar::Real;

pub type Vec3d = Vec3<f64>;
pub type Vec3f = Vec3<f32>;
pub type Mat3d = Mat3<f64>;
pub type Pose64 = Pose<f64>;
pub type Pose32 = Pose<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type DepthImage64 = DepthImage<f64>;
pub type DepthImage32 = DepthImage<f32>;
pub type Camera64 = CameraModel<f64>;
pub type Scan64 = LaserScan2D<f64>;
pub type Model64 = refinement::RefinementModel<f64>;
