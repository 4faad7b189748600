//! Rigid transforms, pinhole projection and depth image / point cloud conversion.
//!
//! Frame conventions: the world frame is z-up; the camera frame is x-right,
//! y-down, z-forward. A camera extrinsic maps world coordinates into the
//! camera frame.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    #[inline]
    pub fn distance_squared(&self, o: &Self) -> T {
        (*self - *o).norm_squared()
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Converts between scalar types.
    pub fn cast<U: Real>(&self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    /// Rotation about the world z axis (yaw).
    pub fn rot_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }

    /// Rotation of `angle` radians about a (not necessarily unit) axis.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let n = axis.norm();
        if n == T::zero() {
            return Self::identity();
        }
        let a = axis.scale(T::one() / n);
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        Self {
            m: [
                [
                    t * a.x * a.x + c,
                    t * a.x * a.y - s * a.z,
                    t * a.x * a.z + s * a.y,
                ],
                [
                    t * a.x * a.y + s * a.z,
                    t * a.y * a.y + c,
                    t * a.y * a.z - s * a.x,
                ],
                [
                    t * a.x * a.z - s * a.y,
                    t * a.y * a.z + s * a.x,
                    t * a.z * a.z + c,
                ],
            ],
        }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Self { m: out }
    }

    fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let m = &self.m;
        let inv_det = T::one() / det;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        Some(Self {
            m: [
                [
                    cof(1, 2, 1, 2) * inv_det,
                    -cof(0, 2, 1, 2) * inv_det,
                    cof(0, 1, 1, 2) * inv_det,
                ],
                [
                    -cof(1, 2, 0, 2) * inv_det,
                    cof(0, 2, 0, 2) * inv_det,
                    -cof(0, 1, 0, 2) * inv_det,
                ],
                [
                    cof(1, 2, 0, 1) * inv_det,
                    -cof(0, 2, 0, 1) * inv_det,
                    cof(0, 1, 0, 1) * inv_det,
                ],
            ],
        })
    }

    /// Largest absolute entry of `R·Rᵀ − I`.
    pub fn orthonormality_error(&self) -> T {
        let p = self.mul_mat(&self.transpose());
        let id = Self::identity();
        let mut err = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                err = err.max((p.m[i][j] - id.m[i][j]).abs());
            }
        }
        err
    }

    /// Nearest rotation matrix via the Newton iteration of the polar decomposition.
    pub fn orthonormalized(&self) -> Option<Self> {
        let half = T::lit(0.5);
        let mut r = *self;
        for _ in 0..64 {
            let inv_t = r.inverse()?.transpose();
            let mut next = r;
            for i in 0..3 {
                for j in 0..3 {
                    next.m[i][j] = half * (r.m[i][j] + inv_t.m[i][j]);
                }
            }
            let mut delta = T::zero();
            for i in 0..3 {
                for j in 0..3 {
                    delta = delta.max((next.m[i][j] - r.m[i][j]).abs());
                }
            }
            r = next;
            if delta <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        (r.determinant() > T::zero()).then_some(r)
    }

    fn cast<U: Real>(&self) -> Mat3<U> {
        let mut out = [[U::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = U::lit(self.m[i][j].to_f64_lossy());
            }
        }
        Mat3 { m: out }
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.m[r][c]
    }
}

/// Tolerance used for the orthonormality checks on rotations.
pub fn rotation_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(64.0))
}

/// A rigid-body transform `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    rotation: Mat3<T>,
    translation: Vec3<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self> {
        let tol = rotation_tolerance::<T>();
        let ortho = rotation.orthonormality_error();
        let det = rotation.determinant();
        if !(ortho <= tol) || !((det - T::one()).abs() <= tol) {
            return Err(Error::InvalidArgument(format!(
                "rotation is not orthonormal (R·Rᵀ error {ortho}, det {det})"
            )));
        }
        if !translation.is_finite() {
            return Err(Error::NonFinite("pose translation".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    /// Planar pose: yaw about world z followed by a translation.
    pub fn from_yaw(yaw: T, t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::rot_z(yaw),
            translation: t,
        }
    }

    /// Rotation from an axis-angle pair. The axis must be non-zero.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T, t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::from_axis_angle(axis, angle),
            translation: t,
        }
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    #[inline]
    pub fn transform_point(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation.mul_mat(&other.rotation),
            translation: self.rotation.mul_vec(&other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -rt.mul_vec(&self.translation),
        }
    }

    /// 3x4 row-major `[R | t]`.
    pub fn to_rows(&self) -> [T; 12] {
        let r = &self.rotation.m;
        let t = &self.translation;
        [
            r[0][0], r[0][1], r[0][2], t.x, r[1][0], r[1][1], r[1][2], t.y, r[2][0], r[2][1],
            r[2][2], t.z,
        ]
    }

    /// Builds a pose from a 3x4 row-major matrix, re-orthonormalizing the
    /// rotation when it drifts by at most `max_drift` from a rotation.
    pub fn from_rows(v: &[T; 12], max_drift: T) -> Result<Self> {
        let rot = Mat3::from_rows([[v[0], v[1], v[2]], [v[4], v[5], v[6]], [v[8], v[9], v[10]]]);
        let t = Vec3::new(v[3], v[7], v[11]);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("pose entries".into()));
        }
        let drift = rot.orthonormality_error();
        if !(drift <= max_drift) || rot.determinant() <= T::zero() {
            return Err(Error::InvalidArgument(format!(
                "rotation drift {drift} exceeds tolerance {max_drift}"
            )));
        }
        let fixed = rot
            .orthonormalized()
            .ok_or_else(|| Error::InvalidArgument("rotation is singular".into()))?;
        Self::new(fixed, t)
    }

    pub fn cast<U: Real>(&self) -> Pose<U> {
        Pose {
            rotation: self.rotation.cast(),
            translation: self.translation.cast(),
        }
    }
}

/// Free-function form of [`Pose::transform_point`].
#[inline]
pub fn transform_point<T: Real>(pose: &Pose<T>, p: &Vec3<T>) -> Vec3<T> {
    pose.transform_point(p)
}

pub fn compose<T: Real>(a: &Pose<T>, b: &Pose<T>) -> Pose<T> {
    a.compose(b)
}

pub fn invert<T: Real>(pose: &Pose<T>) -> Pose<T> {
    pose.inverse()
}

/// Pinhole camera without distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
    /// World → camera.
    pub extrinsic: Pose<T>,
}

/// Image coordinates and camera-frame depth of a projected point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    pub u: T,
    pub v: T,
    pub depth: T,
}

impl<T: Real> Projection<T> {
    /// Integer pixel (column, row) containing the projection.
    pub fn pixel(&self) -> (usize, usize) {
        (
            self.u.floor().to_usize().unwrap_or(0),
            self.v.floor().to_usize().unwrap_or(0),
        )
    }
}

impl<T: Real> CameraModel<T> {
    pub fn new(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        width: usize,
        height: usize,
        extrinsic: Pose<T>,
    ) -> Result<Self> {
        let w = T::from_usize_lossy(width);
        let h = T::from_usize_lossy(height);
        if !(fx > T::zero() && fy > T::zero()) {
            return Err(Error::InvalidArgument("focal lengths must be positive".into()));
        }
        if !(cx >= T::zero() && cx < w && cy >= T::zero() && cy < h) {
            return Err(Error::InvalidArgument(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            extrinsic,
        })
    }

    /// Same intrinsics with a different extrinsic.
    pub fn with_extrinsic(&self, extrinsic: Pose<T>) -> Self {
        Self { extrinsic, ..*self }
    }

    /// Optical center in world coordinates.
    pub fn center(&self) -> Vec3<T> {
        self.extrinsic.inverse().translation()
    }

    /// Projects a camera-frame point; `None` when behind the camera or out of view.
    pub fn project_camera(&self, p: &Vec3<T>) -> Option<Projection<T>> {
        if !(p.z > T::lit(1e-6)) {
            return None;
        }
        let s = p.z;
        let u = self.fx * p.x / s + self.cx;
        let v = self.fy * p.y / s + self.cy;
        let in_view = u >= T::zero()
            && u < T::from_usize_lossy(self.width)
            && v >= T::zero()
            && v < T::from_usize_lossy(self.height);
        in_view.then_some(Projection { u, v, depth: s })
    }

    pub fn project(&self, p_world: &Vec3<T>) -> Option<Projection<T>> {
        self.project_camera(&self.extrinsic.transform_point(p_world))
    }

    /// Camera-frame point at pixel coordinates `(u, v)` and depth `s`.
    #[inline]
    pub fn unproject_camera(&self, u: T, v: T, s: T) -> Vec3<T> {
        Vec3::new((u - self.cx) * s / self.fx, (v - self.cy) * s / self.fy, s)
    }

    pub fn unproject(&self, u: T, v: T, s: T) -> Vec3<T> {
        self.extrinsic
            .inverse()
            .transform_point(&self.unproject_camera(u, v, s))
    }

    /// Unit viewing direction in world frame through pixel `(u, v)`.
    pub fn ray_direction(&self, u: T, v: T) -> Vec3<T> {
        let d = self.unproject_camera(u, v, T::one());
        let world = self.extrinsic.rotation().transpose().mul_vec(&d);
        world.scale(T::one() / world.norm())
    }
}

pub fn project_point<T: Real>(cam: &CameraModel<T>, p_world: &Vec3<T>) -> Option<Projection<T>> {
    cam.project(p_world)
}

/// Row-major per-pixel depth in meters; `0` marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> DepthImage<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|d| !d.is_finite() || **d < T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "depth values must be finite and non-negative, found {bad}"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> T {
        self.data[row * self.width + col]
    }

    /// Crate-internal writer; callers keep values finite and non-negative.
    #[inline]
    pub(crate) fn set(&mut self, col: usize, row: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| **d > T::zero()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud<T> {
    points: Vec<Vec3<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("point {i}")));
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    /// Skips the finiteness check; callers only pass finite points.
    pub(crate) fn from_points_unchecked(points: Vec<Vec3<T>>) -> Self {
        debug_assert!(points.iter().all(Vec3::is_finite));
        Self { points }
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3<T>> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, pose: &Pose<T>) -> Self {
        Self {
            points: self.points.iter().map(|p| pose.transform_point(p)).collect(),
        }
    }

    /// Largest pairwise distance, computed exactly in O(n²).
    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max(a.distance_squared(b));
            }
        }
        best.sqrt()
    }
}

/// Back-projects every valid pixel into a world-frame point, in row-major order.
pub fn backproject_depth<T: Real>(
    cam: &CameraModel<T>,
    depth: &DepthImage<T>,
) -> Result<PointCloud<T>> {
    if depth.width() != cam.width || depth.height() != cam.height {
        return Err(Error::InvalidArgument(format!(
            "depth image is {}x{} but camera is {}x{}",
            depth.width(),
            depth.height(),
            cam.width,
            cam.height
        )));
    }
    let cam_to_world = cam.extrinsic.inverse();
    let mut points = Vec::with_capacity(depth.valid_count());
    for row in 0..depth.height() {
        for col in 0..depth.width() {
            let s = depth.get(col, row);
            if s > T::zero() {
                let pc = cam.unproject_camera(T::from_usize_lossy(col), T::from_usize_lossy(row), s);
                points.push(cam_to_world.transform_point(&pc));
            }
        }
    }
    Ok(PointCloud::from_points_unchecked(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose<f64> {
        let axis = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.1..1.0));
        Pose::from_axis_angle(
            axis,
            rng.random_range(-3.0..3.0),
            v(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
        )
    }

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn transform_identity_and_translation() {
        let p = v(1.0, 2.0, 3.0);
        assert_eq!(transform_point(&Pose::identity(), &p), p);
        let t = Pose::from_translation(v(0.0, 0.0, 5.0));
        assert_eq!(transform_point(&t, &p), v(1.0, 2.0, 8.0));
    }

    #[test]
    fn yaw_quarter_turn() {
        let pose = Pose::from_yaw(std::f64::consts::FRAC_PI_2, Vec3::zero());
        assert!(close(pose.transform_point(&v(1.0, 0.0, 0.0)), v(0.0, 1.0, 0.0), 1e-15));
    }

    #[test]
    fn compose_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_pose(&mut rng);
        assert_eq!(compose(&Pose::identity(), &p), p);
        let id = compose(&p, &invert(&p));
        assert!(id.rotation().orthonormality_error() < 1e-9);
        assert!(id.translation().norm() < 1e-9);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id.rotation()[(i, j)] - e).abs() < 1e-9);
            }
        }
        let a = Pose::from_translation(v(1.0, 0.0, 0.0));
        let b = Pose::from_translation(v(0.0, 2.0, 0.0));
        assert_eq!(compose(&a, &b).translation(), v(1.0, 2.0, 0.0));
    }

    #[test]
    fn compose_applies_right_operand_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (random_pose(&mut rng), random_pose(&mut rng));
        let p = v(0.3, -1.0, 2.0);
        let direct = a.transform_point(&b.transform_point(&p));
        assert!(close(compose(&a, &b).transform_point(&p), direct, 1e-12));
    }

    #[test]
    fn invert_cases() {
        assert_eq!(invert(&Pose::<f64>::identity()), Pose::identity());
        let t = Pose::from_translation(v(1.0, 2.0, 3.0));
        assert_eq!(invert(&t).translation(), v(-1.0, -2.0, -3.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pose = random_pose(&mut rng);
        let inv = invert(&pose);
        let max_err = (0..100)
            .map(|_| {
                let p = v(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
                (inv.transform_point(&pose.transform_point(&p)) - p).norm()
            })
            .fold(0.0, f64::max);
        assert!(max_err < 1e-9, "{max_err}");
    }

    #[test]
    fn pose_rejects_non_rotation() {
        let mut m = Mat3::<f64>::identity();
        m.m[0][0] = 2.0;
        assert!(Pose::new(m, Vec3::zero()).is_err());
        let mut refl = Mat3::<f64>::identity();
        refl.m[2][2] = -1.0;
        assert!(Pose::new(refl, Vec3::zero()).is_err());
    }

    #[test]
    fn from_rows_reorthonormalizes_small_drift() {
        let mut rows = Pose::<f64>::from_yaw(0.4, v(1.0, 2.0, 3.0)).to_rows();
        rows[0] += 5e-4;
        let pose = Pose::from_rows(&rows, 1e-3).unwrap();
        assert!(pose.rotation().orthonormality_error() < 1e-12);
        rows[0] += 0.1;
        assert!(Pose::from_rows(&rows, 1e-3).is_err());
    }

    fn cam(fx: f64, cx: f64, w: usize) -> CameraModel<f64> {
        CameraModel::new(fx, fx, cx, cx, w, w, Pose::identity()).unwrap()
    }

    #[test]
    fn project_examples() {
        let c = CameraModel::new(1.0, 1.0, 0.0, 0.0, 4, 4, Pose::identity()).unwrap();
        assert_eq!(
            project_point(&c, &v(0.0, 0.0, 1.0)),
            Some(Projection { u: 0.0, v: 0.0, depth: 1.0 })
        );
        let c = cam(100.0, 50.0, 200);
        assert_eq!(
            project_point(&c, &v(0.5, 0.0, 1.0)),
            Some(Projection { u: 100.0, v: 50.0, depth: 1.0 })
        );
        assert_eq!(project_point(&c, &v(0.0, 0.0, -1.0)), None);
        // u = 300 is out of a 200-wide image.
        assert_eq!(project_point(&c, &v(2.5, 0.0, 1.0)), None);
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new(0.0, 1.0, 1.0, 1.0, 4, 4, Pose::<f64>::identity()).is_err());
        assert!(CameraModel::new(1.0, 1.0, 4.0, 1.0, 4, 4, Pose::<f64>::identity()).is_err());
    }

    #[test]
    fn backproject_examples() {
        let c = cam(10.0, 2.0, 4);
        let empty = backproject_depth(&c, &DepthImage::zeros(4, 4)).unwrap();
        assert!(empty.is_empty());
        let plane = DepthImage::new(4, 4, vec![1.0; 16]).unwrap();
        let cloud = backproject_depth(&c, &plane).unwrap();
        assert_eq!(cloud.len(), 16);
        assert!(cloud.points().iter().all(|p| p.z == 1.0));
        assert!(backproject_depth(&c, &DepthImage::zeros(3, 4)).is_err());
    }

    #[test]
    fn depth_image_validation() {
        assert!(DepthImage::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DepthImage::new(1, 1, vec![-1.0]).is_err());
        assert!(DepthImage::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn backproject_then_project_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pose = random_pose(&mut rng);
        let c = CameraModel::new(120.0, 110.0, 80.0, 60.0, 160, 120, pose).unwrap();
        for _ in 0..1000 {
            let (u, vv) = (rng.random_range(1..159), rng.random_range(1..119));
            let s = rng.random_range(0.5..40.0);
            let p = c.unproject(u as f64, vv as f64, s);
            let proj = c.project(&p).expect("in view");
            assert!((proj.u - u as f64).abs() < 1e-6);
            assert!((proj.v - vv as f64).abs() < 1e-6);
            assert!((proj.depth - s).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_instantiation() {
        let pose = Pose::<f32>::from_yaw(0.3, Vec3::new(1.0, 0.0, 0.0));
        let p = Vec3::new(0.5f32, 0.25, 2.0);
        let back = pose.inverse().transform_point(&pose.transform_point(&p));
        assert!((back - p).norm() < 1e-6);
    }
}
