//! Synthetic scenes, simulated sensors and artifact injection.

mod corrupt;
mod dataset;
mod rig;
mod scene;

pub use corrupt::{corrupt_cloud, CorruptionSpec, DISCONTINUITY_JUMP};
pub use dataset::{
    derive_seed, generate_dataset, generate_dataset_with, random_scene, render_sample,
    DatasetConfig, SynthSample,
};
pub use rig::{render_depth, simulate_laser, Intrinsics, SensorRig};
pub use scene::{BoxSolid, SceneSpec, Wall};
