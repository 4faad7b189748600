use crate::geometry::Vec3;
use crate::scalar::Real;
use crate::spatial::{ConfidenceGrid, KdIndex};

/// Planar offsets to the `k` nearest laser points, interleaved `(Δx, Δy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FxyFeature<T>(Vec<T>);

/// Height offsets to the `k` nearest cloud neighbors and their confidence,
/// interleaved `(Δz, bev)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FzFeature<T>(Vec<T>);

impl<T> FxyFeature<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }
}

impl<T> FzFeature<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }
}

/// Writes the planar constraint feature of `p` into `out` (length `2k`).
///
/// Points whose nearest laser point lies farther than `reject_radius` get an
/// all-zero feature.
pub fn fxy_into<T: Real>(
    p: &Vec3<T>,
    scan_index: &KdIndex<T>,
    k: usize,
    reject_radius: Option<T>,
    out: &mut Vec<T>,
) {
    out.clear();
    out.resize(2 * k, T::zero());
    let neighbors = scan_index.knn(p, k);
    if let (Some(r), Some(first)) = (reject_radius, neighbors.first()) {
        if first.distance > r {
            return;
        }
    }
    for (i, n) in neighbors.iter().enumerate() {
        let q = scan_index.point(n.index);
        out[2 * i] = q.x - p.x;
        out[2 * i + 1] = q.y - p.y;
    }
}

/// Writes the height constraint feature of `p` into `out` (length `2k`).
///
/// `self_index` removes the query point itself from its neighbor list when it
/// belongs to the indexed cloud.
pub fn fz_into<T: Real>(
    p: &Vec3<T>,
    self_index: Option<usize>,
    cloud_index: &KdIndex<T>,
    grid: &ConfidenceGrid<T>,
    k: usize,
    out: &mut Vec<T>,
) {
    out.clear();
    out.resize(2 * k, T::zero());
    let extra = usize::from(self_index.is_some());
    let neighbors = cloud_index
        .knn(p, k + extra)
        .into_iter()
        .filter(|n| Some(n.index) != self_index)
        .take(k);
    for (i, n) in neighbors.enumerate() {
        let q = cloud_index.point(n.index);
        out[2 * i] = q.z - p.z;
        out[2 * i + 1] = grid.sample(q.x, q.y);
    }
}

pub fn extract_fxy<T: Real>(
    p: &Vec3<T>,
    scan_index: &KdIndex<T>,
    k: usize,
    reject_radius: Option<T>,
) -> FxyFeature<T> {
    let mut v = Vec::new();
    fxy_into(p, scan_index, k, reject_radius, &mut v);
    FxyFeature(v)
}

pub fn extract_fz<T: Real>(
    p: &Vec3<T>,
    self_index: Option<usize>,
    cloud_index: &KdIndex<T>,
    grid: &ConfidenceGrid<T>,
    k: usize,
) -> FzFeature<T> {
    let mut v = Vec::new();
    fz_into(p, self_index, cloud_index, grid, k, &mut v);
    FzFeature(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::LaserScan2D;
    use crate::spatial::build_confidence_grid;

    fn laser(pts: &[(f64, f64)]) -> Vec<Vec3<f64>> {
        pts.iter().map(|&(x, y)| Vec3::new(x, y, 1.2)).collect()
    }

    #[test]
    fn fxy_examples() {
        let idx = KdIndex::build(&laser(&[(0.5, 0.5)]), 2).unwrap();
        let f = extract_fxy(&Vec3::new(0.5, 0.5, 3.0), &idx, 1, None);
        assert_eq!(f.values(), &[0.0, 0.0]);

        let idx = KdIndex::build(&laser(&[(0.0, 2.0), (1.0, 0.0)]), 2).unwrap();
        let f = extract_fxy(&Vec3::zero(), &idx, 2, None);
        assert_eq!(f.values(), &[1.0, 0.0, 0.0, 2.0]);

        let idx = KdIndex::build(&laser(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]), 2).unwrap();
        let f = extract_fxy(&Vec3::zero(), &idx, 9, None);
        assert_eq!(f.values().len(), 18);
        assert_eq!(&f.values()[..6], &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        assert!(f.values()[6..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fxy_reject_radius() {
        let idx = KdIndex::build(&laser(&[(10.0, 0.0)]), 2).unwrap();
        let f = extract_fxy(&Vec3::zero(), &idx, 2, Some(5.0));
        assert_eq!(f.values(), &[0.0; 4]);
        let f = extract_fxy(&Vec3::new(6.0, 0.0, 0.0), &idx, 1, Some(5.0));
        assert_eq!(f.values(), &[4.0, 0.0]);
    }

    #[test]
    fn fz_flat_neighbourhood_and_peak_confidence() {
        let scan = LaserScan2D::new(laser(&[(1.0, 0.0)]), 1.2).unwrap();
        let grid = build_confidence_grid(&scan, 0.2, 0.1, 0.6).unwrap();
        let cloud = vec![
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(1.0, 0.0, 0.5),
            Vec3::new(0.5, 0.3, 0.5),
        ];
        let idx = KdIndex::build(&cloud, 3).unwrap();
        let f = extract_fz(&cloud[0], Some(0), &idx, &grid, 2);
        assert_eq!(f.values()[0], 0.0);
        assert_eq!(f.values()[2], 0.0);
        // second neighbor (1, 0) sits exactly above the laser point
        assert!((f.values()[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fz_matches_brute_force_oracle() {
        let scan = LaserScan2D::new(laser(&[(0.0, 1.0), (1.0, 1.0)]), 1.2).unwrap();
        let grid = build_confidence_grid(&scan, 0.3, 0.05, 1.0).unwrap();
        let cloud = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.2, 0.9, 1.0),
            Vec3::new(-0.3, 0.1, 0.4),
            Vec3::new(0.6, 0.6, -0.2),
            Vec3::new(0.1, -0.4, 0.3),
        ];
        let idx = KdIndex::build(&cloud, 3).unwrap();
        let k = 3;
        let p = cloud[0];
        let mut others: Vec<(f64, usize)> = (1..5).map(|i| ((cloud[i] - p).norm(), i)).collect();
        others.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = Vec::new();
        for &(_, i) in others.iter().take(k) {
            expect.push(cloud[i].z - p.z);
            expect.push(grid.sample(cloud[i].x, cloud[i].y));
        }
        assert_eq!(extract_fz(&p, Some(0), &idx, &grid, k).values(), expect.as_slice());
    }

    #[test]
    fn fz_padding() {
        let scan = LaserScan2D::new(laser(&[(0.0, 0.0)]), 1.2).unwrap();
        let grid = build_confidence_grid(&scan, 0.2, 0.1, 0.6).unwrap();
        let cloud = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let idx = KdIndex::build(&cloud, 3).unwrap();
        let f = extract_fz(&cloud[0], Some(0), &idx, &grid, 9);
        assert_eq!(f.values().len(), 18);
        assert_eq!(f.values()[0], 1.0);
        assert!(f.values()[2..].iter().all(|v| *v == 0.0));
    }
}
