use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::laser::LaserScan2D;
use crate::scalar::Real;
use crate::spatial::{ConfidenceGrid, KdIndex};

use super::features::{fxy_into, fz_into};
use super::mlp::{Activation, Mlp};

pub const DEFAULT_K: usize = 9;
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
pub const DEFAULT_OFFSET_CLAMP: f64 = 2.0;
pub const DEFAULT_REJECT_RADIUS: f64 = 5.0;
/// Multiplier applied to the Glorot range at initialization.
pub const DEFAULT_INIT_SCALE: f64 = 0.1;

/// Two-headed refinement network: planar offsets from `F_xy`, height offsets from `F_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementModel<T> {
    pub mlp_xy: Mlp<T>,
    pub mlp_z: Mlp<T>,
    pub k: usize,
    /// Offsets are clamped to `[-offset_clamp, offset_clamp]` per component.
    pub offset_clamp: T,
    /// Points farther than this from every laser point get a zero `F_xy`.
    pub reject_radius: Option<T>,
}

impl<T: Real> RefinementModel<T> {
    pub fn new(
        mlp_xy: Mlp<T>,
        mlp_z: Mlp<T>,
        k: usize,
        offset_clamp: T,
        reject_radius: Option<T>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let width = 2 * k;
        if mlp_xy.input_width() != width || mlp_z.input_width() != width {
            return Err(Error::InvalidArgument(format!(
                "both heads must take {width} inputs, got {} and {}",
                mlp_xy.input_width(),
                mlp_z.input_width()
            )));
        }
        if mlp_xy.output_width() != 2 || mlp_z.output_width() != 1 {
            return Err(Error::InvalidArgument(
                "heads must output 2 (xy) and 1 (z) values".into(),
            ));
        }
        if !(offset_clamp >= T::zero()) {
            return Err(Error::InvalidArgument("offset clamp must be non-negative".into()));
        }
        Ok(Self {
            mlp_xy,
            mlp_z,
            k,
            offset_clamp,
            reject_radius,
        })
    }

    /// Default architecture `2k → 64 → 64 → out` with small random weights.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        let act = Activation::LeakyRelu(T::lit(DEFAULT_LEAKY_SLOPE));
        let xy = [2 * k, DEFAULT_HIDDEN[0], DEFAULT_HIDDEN[1], 2];
        let z = [2 * k, DEFAULT_HIDDEN[0], DEFAULT_HIDDEN[1], 1];
        Self::new(
            Mlp::random(&xy, act, DEFAULT_INIT_SCALE, rng)?,
            Mlp::random(&z, act, DEFAULT_INIT_SCALE, rng)?,
            k,
            T::lit(DEFAULT_OFFSET_CLAMP),
            Some(T::lit(DEFAULT_REJECT_RADIUS)),
        )
    }

    /// [`RefinementModel::random`] driven by a ChaCha8 stream from `seed`.
    pub fn seeded(k: usize, seed: u64) -> Result<Self> {
        Self::random(k, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// Model whose heads both output exactly zero.
    pub fn zero(k: usize) -> Result<Self> {
        let act = Activation::LeakyRelu(T::lit(DEFAULT_LEAKY_SLOPE));
        Self::new(
            Mlp::zeros(&[2 * k, DEFAULT_HIDDEN[0], DEFAULT_HIDDEN[1], 2], act)?,
            Mlp::zeros(&[2 * k, DEFAULT_HIDDEN[0], DEFAULT_HIDDEN[1], 1], act)?,
            k,
            T::lit(DEFAULT_OFFSET_CLAMP),
            Some(T::lit(DEFAULT_REJECT_RADIUS)),
        )
    }

    #[inline]
    pub(crate) fn clamp(&self, v: T) -> T {
        v.max(-self.offset_clamp).min(self.offset_clamp)
    }
}

/// Constraint features of every point of a preliminary cloud.
#[derive(Debug, Clone)]
pub struct CloudFeatures<T> {
    k: usize,
    fxy: Vec<T>,
    fz: Vec<T>,
}

impl<T: Real> CloudFeatures<T> {
    /// Extracts `F_xy` against the raw scan and `F_z` against the cloud itself.
    pub fn extract(
        cloud: &PointCloud<T>,
        scan: &LaserScan2D<T>,
        grid: &ConfidenceGrid<T>,
        k: usize,
        reject_radius: Option<T>,
    ) -> Result<Self> {
        Self::extract_subset(cloud, scan, grid, k, reject_radius, 0..cloud.len())
    }

    /// Same as [`CloudFeatures::extract`] for a subset of point indices.
    pub fn extract_subset(
        cloud: &PointCloud<T>,
        scan: &LaserScan2D<T>,
        grid: &ConfidenceGrid<T>,
        k: usize,
        reject_radius: Option<T>,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let scan_index = KdIndex::build(scan.points(), 2)?;
        let cloud_index = KdIndex::build(cloud.points(), 3)?;
        let mut fxy = Vec::new();
        let mut fz = Vec::new();
        let mut buf = Vec::with_capacity(2 * k);
        for i in indices {
            let p = &cloud.points()[i];
            fxy_into(p, &scan_index, k, reject_radius, &mut buf);
            fxy.extend_from_slice(&buf);
            fz_into(p, Some(i), &cloud_index, grid, k, &mut buf);
            fz.extend_from_slice(&buf);
        }
        Ok(Self { k, fxy, fz })
    }

    pub fn len(&self) -> usize {
        self.fxy.len() / (2 * self.k)
    }

    pub fn is_empty(&self) -> bool {
        self.fxy.is_empty()
    }

    pub fn fxy(&self, i: usize) -> &[T] {
        &self.fxy[2 * self.k * i..2 * self.k * (i + 1)]
    }

    pub fn fz(&self, i: usize) -> &[T] {
        &self.fz[2 * self.k * i..2 * self.k * (i + 1)]
    }
}

/// Refines every point: xy shifted by the clamped xy head, z by the clamped z head.
pub fn apply_refinement<T: Real>(
    model: &RefinementModel<T>,
    cloud: &PointCloud<T>,
    scan: &LaserScan2D<T>,
    grid: &ConfidenceGrid<T>,
) -> Result<PointCloud<T>> {
    if cloud.is_empty() {
        return Err(Error::Empty("cloud to refine is empty"));
    }
    if scan.is_empty() {
        return Err(Error::Empty("scan has no points"));
    }
    let feats = CloudFeatures::extract(cloud, scan, grid, model.k, model.reject_radius)?;
    let mut out = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        let dxy = model.mlp_xy.forward(feats.fxy(i))?;
        let dz = model.mlp_z.forward(feats.fz(i))?;
        let q = Vec3::new(
            p.x + model.clamp(dxy[0]),
            p.y + model.clamp(dxy[1]),
            p.z + model.clamp(dz[0]),
        );
        if !q.is_finite() {
            return Err(Error::NonFinite(format!("refined point {i}")));
        }
        out.push(q);
    }
    PointCloud::new(out)
}

/// Sum of squared distances from each refined point to its nearest map point,
/// with the index of that map point.
pub fn refinement_loss<T: Real>(refined: &PointCloud<T>, map_index: &KdIndex<T>) -> (T, Vec<usize>) {
    let mut loss = T::zero();
    let mut corr = Vec::with_capacity(refined.len());
    for p in refined.points() {
        let n = map_index.nearest(p);
        loss += n.distance * n.distance;
        corr.push(n.index);
    }
    (loss, corr)
}
