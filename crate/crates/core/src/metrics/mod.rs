//! Evaluation: 2D depth error measures, earth mover's distance and the
//! Euclidean fitness score.

mod depth;
mod efs;
mod emd;

pub use depth::{depth_metrics, DepthMetrics};
pub use efs::{efs, efs_with_index, Efs, DEFAULT_EFS_MAX_DIST};
pub use emd::{
    emd_between, emd_exact, emd_sinkhorn, hungarian, subsample, SinkhornResult, DEFAULT_EMD_CAP,
    DEFAULT_SUBSAMPLE_SEED,
};

use crate::error::Result;
use crate::geometry::PointCloud;
use crate::scalar::Real;

/// 3D metrics of a predicted cloud against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudMetrics<T> {
    pub emd: T,
    pub efs: T,
    pub efs_sum: T,
    pub n_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudMetricParams<T> {
    pub emd_cap: usize,
    pub seed: u64,
    pub efs_max_dist: T,
}

impl<T: Real> Default for CloudMetricParams<T> {
    fn default() -> Self {
        Self {
            emd_cap: DEFAULT_EMD_CAP,
            seed: DEFAULT_SUBSAMPLE_SEED,
            efs_max_dist: T::lit(DEFAULT_EFS_MAX_DIST),
        }
    }
}

pub fn cloud_metrics<T: Real>(
    pred: &PointCloud<T>,
    reference: &PointCloud<T>,
    params: &CloudMetricParams<T>,
) -> Result<CloudMetrics<T>> {
    let emd = emd_exact(pred, reference, params.emd_cap, params.seed)?;
    let e = efs(pred, reference, params.efs_max_dist)?;
    Ok(CloudMetrics {
        emd,
        efs: e.mean,
        efs_sum: e.sum,
        n_used: e.n_used,
    })
}
