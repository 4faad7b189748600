//! Planar laser scans and the front-view depth mask lifted from them.
//!
//! Each scan point is lifted to a lower and an upper boundary point by
//! shifting it along world z. Both are projected into the image and the
//! vertical pixel span between them is filled with the camera depth of the
//! scan point. Columns between consecutive beams are filled by linear
//! interpolation when the beams are angular neighbors.

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, DepthImage, Pose, Vec3};
use crate::scalar::Real;

/// Default offset from the scan plane down to the lower boundary.
pub const DEFAULT_BELOW: f64 = 1.2;
/// Default offset from the scan plane up to the upper boundary.
pub const DEFAULT_ABOVE: f64 = 0.8;
/// Default laser mount height above ground.
pub const DEFAULT_MOUNT_HEIGHT: f64 = 1.2;

/// A single planar scan in world coordinates, ordered by beam angle.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan2D<T> {
    points: Vec<Vec3<T>>,
    mount_height: T,
}

impl<T: Real> LaserScan2D<T> {
    pub fn new(points: Vec<Vec3<T>>, mount_height: T) -> Result<Self> {
        if !mount_height.is_finite() {
            return Err(Error::NonFinite("mount height".into()));
        }
        let tol = T::lit(1e-6);
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("scan point {i}")));
            }
            if !((p.z - mount_height).abs() < tol) {
                return Err(Error::InvalidArgument(format!(
                    "scan point {i} has z = {} but mount height is {mount_height}",
                    p.z
                )));
            }
        }
        Ok(Self {
            points,
            mount_height,
        })
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn mount_height(&self) -> T {
        self.mount_height
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Converts raw polar returns into a world-frame scan.
///
/// Non-positive and non-finite ranges are dropped, ordering is preserved.
pub fn scan_from_polar<T: Real>(
    angles: &[T],
    ranges: &[T],
    mount_height: T,
    sensor_pose: &Pose<T>,
) -> Result<LaserScan2D<T>> {
    if angles.len() != ranges.len() {
        return Err(Error::DimensionMismatch {
            expected: angles.len(),
            found: ranges.len(),
        });
    }
    let points = angles
        .iter()
        .zip(ranges)
        .filter(|(a, r)| a.is_finite() && r.is_finite() && **r > T::zero())
        .map(|(&a, &r)| {
            let (s, c) = a.sin_cos();
            let mut p = sensor_pose.transform_point(&Vec3::new(r * c, r * s, T::zero()));
            p.z = mount_height;
            p
        })
        .collect();
    LaserScan2D::new(points, mount_height)
}

/// Lower and upper boundary points lifted from a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet<T> {
    pub lower: Vec<Vec3<T>>,
    pub upper: Vec<Vec3<T>>,
}

pub fn build_boundaries<T: Real>(
    scan: &LaserScan2D<T>,
    below: T,
    above: T,
) -> Result<BoundarySet<T>> {
    if scan.is_empty() {
        return Err(Error::Empty("scan has no points"));
    }
    let lower = scan
        .points()
        .iter()
        .map(|p| Vec3::new(p.x, p.y, p.z - below))
        .collect();
    let upper = scan
        .points()
        .iter()
        .map(|p| Vec3::new(p.x, p.y, p.z + above))
        .collect();
    Ok(BoundarySet { lower, upper })
}

/// Front-view raster of metric depths; zero outside the masked band.
pub type Mask<T> = DepthImage<T>;

/// A beam whose lower and upper boundary both project into the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFootprint<T> {
    /// Position of the beam in the scan.
    pub beam: usize,
    /// Horizontal image coordinate of the band (mean of both projections).
    pub u: T,
    /// Image row of the upper boundary (smaller v).
    pub v_top: T,
    /// Image row of the lower boundary.
    pub v_bottom: T,
    /// Camera-frame depth of the scan point.
    pub depth: T,
    /// Bearing of the scan point seen from the camera center in the xy plane.
    bearing: T,
}

/// Projects every beam's boundary pair; beams with either end out of view are skipped.
pub fn beam_footprints<T: Real>(
    cam: &CameraModel<T>,
    scan: &LaserScan2D<T>,
    below: T,
    above: T,
) -> Vec<BeamFootprint<T>> {
    let center = cam.center();
    scan.points()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let lower = cam.project(&Vec3::new(p.x, p.y, p.z - below))?;
            let upper = cam.project(&Vec3::new(p.x, p.y, p.z + above))?;
            let depth = cam.extrinsic.transform_point(p).z;
            if !(depth > T::zero()) {
                return None;
            }
            let (v_top, v_bottom) = if upper.v <= lower.v {
                (upper.v, lower.v)
            } else {
                (lower.v, upper.v)
            };
            Some(BeamFootprint {
                beam: i,
                u: (lower.u + upper.u) * T::lit(0.5),
                v_top,
                v_bottom,
                depth,
                bearing: (p.y - center.y).atan2(p.x - center.x),
            })
        })
        .collect()
}

/// Pairs of consecutive footprints that are bridged across columns.
///
/// Two beams are bridged when their bearing gap is below twice the nominal
/// (median) gap between consecutive in-view beams.
pub fn bridged_pairs<T: Real>(footprints: &[BeamFootprint<T>]) -> Vec<(usize, usize)> {
    if footprints.len() < 2 {
        return Vec::new();
    }
    let gap = |a: &BeamFootprint<T>, b: &BeamFootprint<T>| {
        let mut d = (b.bearing - a.bearing).abs();
        if d > T::PI() {
            d = T::lit(2.0) * T::PI() - d;
        }
        d
    };
    let mut gaps: Vec<T> = footprints.windows(2).map(|w| gap(&w[0], &w[1])).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let nominal = gaps[(gaps.len() - 1) / 2];
    let limit = T::lit(2.0) * nominal;
    footprints
        .windows(2)
        .enumerate()
        .filter(|(_, w)| gap(&w[0], &w[1]) < limit)
        .map(|(i, _)| (i, i + 1))
        .collect()
}

fn column_of<T: Real>(u: T, width: usize) -> Option<usize> {
    let c = u.floor();
    (c >= T::zero() && c < T::from_usize_lossy(width)).then(|| c.to_usize().unwrap_or(0))
}

fn fill_span<T: Real>(mask: &mut Mask<T>, col: usize, v_top: T, v_bottom: T, depth: T) {
    let height = mask.height();
    let first = v_top.ceil().max(T::zero());
    let last = v_bottom.floor().min(T::from_usize_lossy(height - 1));
    if first > last {
        return;
    }
    let (first, last) = (
        first.to_usize().unwrap_or(0),
        last.to_usize().unwrap_or(0),
    );
    for row in first..=last {
        let cur = mask.get(col, row);
        if cur == T::zero() || depth < cur {
            mask.set(col, row, depth);
        }
    }
}

/// Rasterizes the band between the lower and upper boundaries of `scan`.
pub fn build_3d_mask<T: Real>(
    cam: &CameraModel<T>,
    scan: &LaserScan2D<T>,
    below: T,
    above: T,
) -> Mask<T> {
    let mut mask = Mask::zeros(cam.width, cam.height);
    let fps = beam_footprints(cam, scan, below, above);
    for fp in &fps {
        if let Some(col) = column_of(fp.u, cam.width) {
            fill_span(&mut mask, col, fp.v_top, fp.v_bottom, fp.depth);
        }
    }
    for (a, b) in bridged_pairs(&fps) {
        let (fa, fb) = (&fps[a], &fps[b]);
        let (Some(ca), Some(cb)) = (column_of(fa.u, cam.width), column_of(fb.u, cam.width)) else {
            continue;
        };
        if ca == cb {
            continue;
        }
        let (lo, hi) = (ca.min(cb), ca.max(cb));
        let du = fb.u - fa.u;
        for col in lo + 1..hi {
            let t = ((T::from_usize_lossy(col) - fa.u) / du).max(T::zero()).min(T::one());
            let lerp = |x: T, y: T| x + (y - x) * t;
            fill_span(
                &mut mask,
                col,
                lerp(fa.v_top, fb.v_top),
                lerp(fa.v_bottom, fb.v_bottom),
                lerp(fa.depth, fb.depth),
            );
        }
    }
    mask
}
