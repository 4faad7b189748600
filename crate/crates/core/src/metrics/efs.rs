use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::Real;
use crate::spatial::KdIndex;

pub const DEFAULT_EFS_MAX_DIST: f64 = 1.0;

/// Euclidean fitness score: squared nearest-neighbor distances from a
/// prediction to a reference, over correspondences within `max_dist`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efs<T> {
    /// Mean squared correspondence distance (headline value).
    pub mean: T,
    /// Raw sum of squared correspondence distances.
    pub sum: T,
    pub n_used: usize,
}

pub fn efs<T: Real>(pred: &PointCloud<T>, reference: &PointCloud<T>, max_dist: T) -> Result<Efs<T>> {
    if pred.is_empty() || reference.is_empty() {
        return Err(Error::Empty("fitness score needs non-empty clouds"));
    }
    let index = KdIndex::build(reference.points(), 3)?;
    efs_with_index(pred, &index, max_dist)
}

/// [`efs`] against a prebuilt 3D index of the reference cloud.
pub fn efs_with_index<T: Real>(pred: &PointCloud<T>, reference: &KdIndex<T>, max_dist: T) -> Result<Efs<T>> {
    let mut sum = T::zero();
    let mut n_used = 0usize;
    for p in pred.points() {
        let d = reference.nearest(p).distance;
        if d <= max_dist {
            sum += d * d;
            n_used += 1;
        }
    }
    if n_used == 0 {
        return Err(Error::Empty("no correspondence within the maximum distance"));
    }
    Ok(Efs {
        mean: sum / T::from_usize_lossy(n_used),
        sum,
        n_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subset_scores_zero() {
        let r = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0)]).unwrap();
        let p = PointCloud::new(vec![Vec3::new(1.0, 1.0, 1.0)]).unwrap();
        let e = efs(&p, &r, 1.0).unwrap();
        assert_eq!((e.mean, e.sum, e.n_used), (0.0, 0.0, 1));
    }

    #[test]
    fn single_offset() {
        let r = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0)]).unwrap();
        let p = PointCloud::new(vec![Vec3::new(0.1, 0.0, 0.0)]).unwrap();
        assert!((efs::<f64>(&p, &r, 1.0).unwrap().mean - 0.01).abs() < 1e-15);
    }

    #[test]
    fn no_correspondence_is_error() {
        let r = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0)]).unwrap();
        let p = PointCloud::new(vec![Vec3::new(3.0, 0.0, 0.0)]).unwrap();
        assert!(efs(&p, &r, 1.0).is_err());
    }

    #[test]
    fn brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut rv = |s: f64| Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s));
        let map: Vec<Vec3<f64>> = (0..400).map(|_| rv(3.0)).collect();
        let pred: Vec<Vec3<f64>> = (0..100).map(|_| rv(3.5)).collect();
        let e = efs(&PointCloud::new(pred.clone()).unwrap(), &PointCloud::new(map.clone()).unwrap(), 0.5).unwrap();
        let d2: Vec<f64> = pred
            .iter()
            .map(|p| map.iter().map(|m| (*p - *m).norm_squared()).fold(f64::INFINITY, f64::min))
            .filter(|d2| d2.sqrt() <= 0.5)
            .collect();
        let sum: f64 = d2.iter().sum();
        assert_eq!(e.n_used, d2.len());
        assert!((e.sum - sum).abs() < 1e-10);
        assert!((e.mean - sum / d2.len() as f64).abs() < 1e-10);
    }
}
