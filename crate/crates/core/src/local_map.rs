//! Dense local map accumulated from the most recent range scans.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose, Vec3};
use crate::scalar::Real;

/// Number of scans kept in the buffer.
pub const BUFFER_CAPACITY: usize = 5;
pub const DEFAULT_THRESH_OUTDOOR: f64 = 30.0;
pub const DEFAULT_THRESH_INDOOR: f64 = 8.0;

/// FIFO of the most recent `(sensor-frame cloud, sensor → world pose)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ScanBuffer<T> {
    entries: VecDeque<(PointCloud<T>, Pose<T>)>,
}

impl<T: Real> ScanBuffer<T> {
    pub fn new() -> Self {
        Self {
            entries: VecDeque::with_capacity(BUFFER_CAPACITY),
        }
    }

    /// Appends a scan, evicting the oldest once the buffer is full.
    pub fn push(&mut self, cloud: PointCloud<T>, pose: Pose<T>) {
        if self.entries.len() == BUFFER_CAPACITY {
            self.entries.pop_front();
        }
        self.entries.push_back((cloud, pose));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest first.
    pub fn entries(&self) -> impl Iterator<Item = &(PointCloud<T>, Pose<T>)> {
        self.entries.iter()
    }

    pub fn newest_pose(&self) -> Option<&Pose<T>> {
        self.entries.back().map(|(_, p)| p)
    }

    /// Total number of buffered points.
    pub fn point_count(&self) -> usize {
        self.entries.iter().map(|(c, _)| c.len()).sum()
    }
}

/// Functional form of [`ScanBuffer::push`].
pub fn push_scan<T: Real>(
    mut buf: ScanBuffer<T>,
    cloud: PointCloud<T>,
    pose: Pose<T>,
) -> ScanBuffer<T> {
    buf.push(cloud, pose);
    buf
}

/// World-frame union of buffered scans cropped to a ball around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap<T> {
    cloud: PointCloud<T>,
    center: Vec3<T>,
    thresh: T,
}

impl<T: Real> LocalMap<T> {
    /// Wraps an existing world-frame cloud, dropping points beyond `thresh`.
    pub fn from_cloud(cloud: &PointCloud<T>, center: Vec3<T>, thresh: T) -> Result<Self> {
        check_thresh(thresh)?;
        let points = cloud
            .points()
            .iter()
            .filter(|p| p.distance(&center) <= thresh)
            .copied()
            .collect();
        Ok(Self {
            cloud: PointCloud::from_points_unchecked(points),
            center,
            thresh,
        })
    }

    pub fn cloud(&self) -> &PointCloud<T> {
        &self.cloud
    }

    pub fn center(&self) -> Vec3<T> {
        self.center
    }

    pub fn thresh(&self) -> T {
        self.thresh
    }

    /// Keeps one centroid per occupied voxel of edge `leaf`.
    pub fn voxel_downsampled(&self, leaf: T) -> Result<Self> {
        if !(leaf > T::zero()) {
            return Err(Error::InvalidArgument("voxel leaf size must be positive".into()));
        }
        let mut cells: HashMap<(i64, i64, i64), (Vec3<T>, usize)> = HashMap::new();
        let mut order = Vec::new();
        for p in self.cloud.points() {
            let key = (
                (p.x / leaf).floor().to_i64().unwrap_or(0),
                (p.y / leaf).floor().to_i64().unwrap_or(0),
                (p.z / leaf).floor().to_i64().unwrap_or(0),
            );
            let entry = cells.entry(key).or_insert_with(|| {
                order.push(key);
                (Vec3::zero(), 0)
            });
            entry.0 = entry.0 + *p;
            entry.1 += 1;
        }
        // Centroids of points within the ball may drift outside by at most
        // one voxel diagonal; re-crop to keep the invariant.
        let points = order
            .iter()
            .map(|k| {
                let (sum, n) = cells[k];
                sum.scale(T::one() / T::from_usize_lossy(n))
            })
            .filter(|p| p.distance(&self.center) <= self.thresh)
            .collect();
        Ok(Self {
            cloud: PointCloud::from_points_unchecked(points),
            center: self.center,
            thresh: self.thresh,
        })
    }
}

fn check_thresh<T: Real>(thresh: T) -> Result<()> {
    if thresh > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("thresh must be positive".into()))
    }
}

/// Transforms every buffered scan to world frame and keeps points within
/// `thresh` of `center` (inclusive). `center` defaults to the translation of
/// the newest pose.
pub fn build_local_map<T: Real>(
    buf: &ScanBuffer<T>,
    center: Option<Vec3<T>>,
    thresh: T,
) -> Result<LocalMap<T>> {
    let newest = buf
        .newest_pose()
        .ok_or(Error::Empty("scan buffer is empty"))?;
    check_thresh(thresh)?;
    let center = center.unwrap_or_else(|| newest.translation());
    let mut points = Vec::with_capacity(buf.point_count());
    for (cloud, pose) in buf.entries() {
        points.extend(
            cloud
                .points()
                .iter()
                .map(|p| pose.transform_point(p))
                .filter(|p| p.distance(&center) <= thresh),
        );
    }
    Ok(LocalMap {
        cloud: PointCloud::from_points_unchecked(points),
        center,
        thresh,
    })
}
