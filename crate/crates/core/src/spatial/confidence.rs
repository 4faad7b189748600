use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::laser::LaserScan2D;
use crate::scalar::Real;

use super::kdtree::KdTree;

pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_CELL: f64 = 0.1;

/// Bird's-eye-view raster of Gaussian proximity to a laser scan.
///
/// Cell `(i, j)` is centered at `origin + (i·cell, j·cell)`. Values are the
/// maximum kernel response over all scan points, so they stay in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceGrid<T> {
    origin: (T, T),
    cell: T,
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> ConfidenceGrid<T> {
    pub fn origin(&self) -> (T, T) {
        self.origin
    }

    pub fn cell(&self) -> T {
        self.cell
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[j * self.width + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (T, T) {
        (
            self.origin.0 + T::from_usize_lossy(i) * self.cell,
            self.origin.1 + T::from_usize_lossy(j) * self.cell,
        )
    }

    /// Bilinear interpolation between cell centers; zero outside the grid.
    pub fn sample(&self, x: T, y: T) -> T {
        let fx = (x - self.origin.0) / self.cell;
        let fy = (y - self.origin.1) / self.cell;
        let max_x = T::from_usize_lossy(self.width - 1);
        let max_y = T::from_usize_lossy(self.height - 1);
        if !(fx >= T::zero() && fx <= max_x && fy >= T::zero() && fy <= max_y) {
            return T::zero();
        }
        let i0 = fx.floor().to_usize().unwrap_or(0).min(self.width.saturating_sub(2));
        let j0 = fy.floor().to_usize().unwrap_or(0).min(self.height.saturating_sub(2));
        let tx = fx - T::from_usize_lossy(i0);
        let ty = fy - T::from_usize_lossy(j0);
        let i1 = (i0 + 1).min(self.width - 1);
        let j1 = (j0 + 1).min(self.height - 1);
        let (a, b) = (self.value(i0, j0), self.value(i1, j0));
        let (c, d) = (self.value(i0, j1), self.value(i1, j1));
        let one = T::one();
        let v = (a * (one - tx) + b * tx) * (one - ty) + (c * (one - tx) + d * tx) * ty;
        v.max(T::zero()).min(one)
    }
}

/// Rasterizes `exp(−d²/2σ²)` over the scan's xy bounding box grown by `padding`,
/// where `d` is the distance from a cell center to the nearest scan point.
pub fn build_confidence_grid<T: Real>(
    scan: &LaserScan2D<T>,
    sigma: T,
    cell: T,
    padding: T,
) -> Result<ConfidenceGrid<T>> {
    if scan.is_empty() {
        return Err(Error::Empty("scan has no points"));
    }
    if !(sigma > T::zero()) || !(cell > T::zero()) {
        return Err(Error::InvalidArgument("sigma and cell must be positive".into()));
    }
    if !(padding >= T::zero()) {
        return Err(Error::InvalidArgument("padding must be non-negative".into()));
    }
    let pts = scan.points();
    let (mut lo_x, mut lo_y) = (T::infinity(), T::infinity());
    let (mut hi_x, mut hi_y) = (T::neg_infinity(), T::neg_infinity());
    for p in pts {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    // Snap the lattice to integer multiples of `cell`.
    let ix0 = ((lo_x - padding) / cell).floor();
    let iy0 = ((lo_y - padding) / cell).floor();
    let ix1 = ((hi_x + padding) / cell).ceil();
    let iy1 = ((hi_y + padding) / cell).ceil();
    let width = (ix1 - ix0).to_usize().unwrap_or(0) + 1;
    let height = (iy1 - iy0).to_usize().unwrap_or(0) + 1;
    let origin = (ix0 * cell, iy0 * cell);

    let tree = KdTree::new(pts.iter().map(|p| [p.x, p.y]).collect())?;
    let denom = T::lit(2.0) * sigma * sigma;
    let mut values = Vec::with_capacity(width * height);
    for j in 0..height {
        let y = origin.1 + T::from_usize_lossy(j) * cell;
        for i in 0..width {
            let x = origin.0 + T::from_usize_lossy(i) * cell;
            let d = tree.nearest(&[x, y]).distance;
            values.push((-(d * d) / denom).exp());
        }
    }
    Ok(ConfidenceGrid {
        origin,
        cell,
        width,
        height,
        values,
    })
}

pub fn sample_confidence<T: Real>(grid: &ConfidenceGrid<T>, x: T, y: T) -> T {
    grid.sample(x, y)
}

/// Convenience for sampling at a point's xy.
impl<T: Real> ConfidenceGrid<T> {
    pub fn sample_point(&self, p: &Vec3<T>) -> T {
        self.sample(p.x, p.y)
    }
}
