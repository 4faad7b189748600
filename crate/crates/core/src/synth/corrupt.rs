use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, DepthImage, PointCloud, Vec3};
use crate::scalar::Real;

/// Depth jump between 4-neighbors that marks a discontinuity.
pub const DISCONTINUITY_JUMP: f64 = 1.0;

/// Parameters of the two pseudo-LiDAR artifact classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec<T> {
    /// Probability that a pixel on the near side of a discontinuity grows a tail.
    pub tail_prob: T,
    /// Maximum elongation of a tail along its viewing ray.
    pub tail_length: T,
    /// Per-axis standard deviation of the planar noise.
    pub misalign_sigma: T,
    pub seed: u64,
}

impl<T: Real> CorruptionSpec<T> {
    pub fn none() -> Self {
        Self {
            tail_prob: T::zero(),
            tail_length: T::zero(),
            misalign_sigma: T::zero(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_prob >= T::zero() && self.tail_prob <= T::one()) {
            return Err(Error::InvalidArgument("tail probability must lie in [0, 1]".into()));
        }
        if !(self.tail_length >= T::zero()) || !(self.misalign_sigma >= T::zero()) {
            return Err(Error::InvalidArgument("corruption lengths must be non-negative".into()));
        }
        if !self.tail_length.is_finite() || !self.misalign_sigma.is_finite() {
            return Err(Error::NonFinite("corruption lengths".into()));
        }
        Ok(())
    }

    pub fn is_noop(&self) -> bool {
        (self.tail_prob == T::zero() || self.tail_length == T::zero())
            && self.misalign_sigma == T::zero()
    }
}

/// Whether pixel `(col, row)` is the near side of a depth discontinuity.
fn near_side_of_jump<T: Real>(depth: &DepthImage<T>, col: usize, row: usize, jump: T) -> bool {
    let s = depth.get(col, row);
    let (w, h) = (depth.width(), depth.height());
    let mut neighbors = [None; 4];
    if col > 0 {
        neighbors[0] = Some((col - 1, row));
    }
    if col + 1 < w {
        neighbors[1] = Some((col + 1, row));
    }
    if row > 0 {
        neighbors[2] = Some((col, row - 1));
    }
    if row + 1 < h {
        neighbors[3] = Some((col, row + 1));
    }
    neighbors.into_iter().flatten().any(|(c, r)| {
        let n = depth.get(c, r);
        n > T::zero() && n - s > jump
    })
}

/// Applies tails and misalignment to a cloud back-projected from `gt_depth`.
///
/// Tails push near-side boundary points away from the camera along their
/// viewing ray by `Uniform(0, tail_length)`; misalignment adds independent
/// Gaussian noise to x and y of every point.
pub fn corrupt_cloud<T: Real>(
    cloud: &PointCloud<T>,
    gt_depth: &DepthImage<T>,
    cam: &CameraModel<T>,
    spec: &CorruptionSpec<T>,
) -> Result<PointCloud<T>> {
    spec.validate()?;
    if gt_depth.valid_count() != cloud.len() {
        return Err(Error::DimensionMismatch {
            expected: gt_depth.valid_count(),
            found: cloud.len(),
        });
    }
    if spec.is_noop() {
        return Ok(cloud.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.misalign_sigma.to_f64_lossy())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let center = cam.center();
    let jump = T::lit(DISCONTINUITY_JUMP);
    let tails = spec.tail_prob > T::zero() && spec.tail_length > T::zero();
    let prob = spec.tail_prob.to_f64_lossy();
    let mut points = cloud.points().to_vec();
    let mut k = 0usize;
    for row in 0..gt_depth.height() {
        for col in 0..gt_depth.width() {
            if gt_depth.get(col, row) <= T::zero() {
                continue;
            }
            let p = &mut points[k];
            k += 1;
            if tails && near_side_of_jump(gt_depth, col, row, jump) && rng.random::<f64>() < prob {
                // (0, 1] so the point always moves
                let u = T::one() - T::lit(rng.random::<f64>());
                let ray: Vec3<T> = *p - center;
                let dir = ray.scale(T::one() / ray.norm());
                *p = *p + dir.scale(u * spec.tail_length);
            }
            if spec.misalign_sigma > T::zero() {
                p.x += T::lit(noise.sample(&mut rng));
                p.y += T::lit(noise.sample(&mut rng));
            }
        }
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{backproject_depth, Pose};

    fn camera() -> CameraModel<f64> {
        CameraModel::new(50.0, 50.0, 20.0, 20.0, 40, 40, Pose::identity()).unwrap()
    }

    /// Near block at depth 2 in the left half, background at 6 on the right.
    fn step_depth() -> DepthImage<f64> {
        let data = (0..40 * 40).map(|i| if i % 40 < 20 { 2.0 } else { 6.0 }).collect();
        DepthImage::new(40, 40, data).unwrap()
    }

    #[test]
    fn noop_spec_is_identity() {
        let cam = camera();
        let depth = step_depth();
        let cloud = backproject_depth(&cam, &depth).unwrap();
        let out = corrupt_cloud(&cloud, &depth, &cam, &CorruptionSpec::none()).unwrap();
        assert_eq!(out, cloud);
    }

    #[test]
    fn tails_push_edge_points_back() {
        let cam = camera();
        let depth = step_depth();
        let cloud = backproject_depth(&cam, &depth).unwrap();
        let spec = CorruptionSpec { tail_prob: 1.0, tail_length: 2.0, misalign_sigma: 0.0, seed: 3 };
        let out = corrupt_cloud(&cloud, &depth, &cam, &spec).unwrap();
        for (i, (a, b)) in out.points().iter().zip(cloud.points()).enumerate() {
            let col = i % 40;
            if col == 19 {
                assert!(a.z > b.z, "edge point {i} did not move back");
                assert!(a.z - b.z <= 2.0 + 1e-12);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn misalignment_mean_displacement() {
        let cam = CameraModel::new(50.0, 50.0, 50.0, 50.0, 100, 100, Pose::identity()).unwrap();
        let depth = DepthImage::new(100, 100, vec![3.0; 10_000]).unwrap();
        let cloud = backproject_depth(&cam, &depth).unwrap();
        let sigma = 0.1;
        let spec = CorruptionSpec { tail_prob: 0.0, tail_length: 0.0, misalign_sigma: sigma, seed: 9 };
        let out = corrupt_cloud(&cloud, &depth, &cam, &spec).unwrap();
        let mean: f64 = out
            .points()
            .iter()
            .zip(cloud.points())
            .map(|(a, b): (&Vec3<f64>, &Vec3<f64>)| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt())
            .sum::<f64>()
            / 10_000.0;
        let expect = sigma * (std::f64::consts::PI / 2.0).sqrt();
        assert!((mean - expect).abs() / expect < 0.05, "{mean} vs {expect}");
        assert!(out.points().iter().zip(cloud.points()).all(|(a, b)| a.z == b.z));
    }

    #[test]
    fn deterministic_given_seed() {
        let cam = camera();
        let depth = step_depth();
        let cloud = backproject_depth(&cam, &depth).unwrap();
        let spec = CorruptionSpec { tail_prob: 0.5, tail_length: 2.0, misalign_sigma: 0.15, seed: 42 };
        assert_eq!(
            corrupt_cloud(&cloud, &depth, &cam, &spec).unwrap(),
            corrupt_cloud(&cloud, &depth, &cam, &spec).unwrap()
        );
    }

    #[test]
    fn rejects_bad_spec() {
        let cam = camera();
        let depth = step_depth();
        let cloud = backproject_depth(&cam, &depth).unwrap();
        let spec = CorruptionSpec { tail_prob: 1.5, tail_length: 2.0, misalign_sigma: 0.0, seed: 0 };
        assert!(corrupt_cloud(&cloud, &depth, &cam, &spec).is_err());
    }
}
