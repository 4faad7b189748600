use crate::error::{Error, Result};
use crate::geometry::{CameraModel, DepthImage, Mat3, Pose, Vec3};
use crate::laser::LaserScan2D;
use crate::scalar::Real;

use super::scene::SceneSpec;

/// Pinhole intrinsics without a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> Intrinsics<T> {
    /// 160×120 with a 90° horizontal field of view.
    pub fn default_160x120() -> Self {
        Self {
            fx: T::lit(80.0),
            fy: T::lit(80.0),
            cx: T::lit(80.0),
            cy: T::lit(60.0),
            width: 160,
            height: 120,
        }
    }

    pub fn camera(&self, extrinsic: Pose<T>) -> Result<CameraModel<T>> {
        CameraModel::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height, extrinsic)
    }
}

/// Level camera plus planar laser on a ground vehicle.
///
/// `pose` maps the vehicle base frame (x forward, z up, origin on the ground)
/// into the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRig<T> {
    pub intrinsics: Intrinsics<T>,
    pub camera_height: T,
    pub mount_height: T,
    pub beam_count: usize,
    /// Total angular span of the laser, centered on the forward axis.
    pub beam_span: T,
    pub pose: Pose<T>,
}

impl<T: Real> SensorRig<T> {
    pub fn new(
        intrinsics: Intrinsics<T>,
        camera_height: T,
        mount_height: T,
        beam_count: usize,
        beam_span: T,
        pose: Pose<T>,
    ) -> Result<Self> {
        if !(mount_height > T::zero()) || !(camera_height > T::zero()) {
            return Err(Error::InvalidArgument("sensor heights must be positive".into()));
        }
        if beam_count < 2 {
            return Err(Error::InvalidArgument("a laser needs at least two beams".into()));
        }
        if !(beam_span > T::zero()) {
            return Err(Error::InvalidArgument("beam span must be positive".into()));
        }
        Ok(Self {
            intrinsics,
            camera_height,
            mount_height,
            beam_count,
            beam_span,
            pose,
        })
    }

    /// Camera → world.
    pub fn camera_to_world(&self) -> Pose<T> {
        let (o, z) = (T::one(), T::zero());
        // camera x → -y, camera y → -z, camera z → +x in the base frame
        let r = Mat3::from_rows([[z, z, o], [-o, z, z], [z, -o, z]]);
        let mount = Pose::new(r, Vec3::new(z, z, self.camera_height)).expect("axis permutation");
        self.pose.compose(&mount)
    }

    pub fn camera(&self) -> CameraModel<T> {
        self.intrinsics
            .camera(self.camera_to_world().inverse())
            .expect("intrinsics validated at construction")
    }

    pub fn laser_origin(&self) -> Vec3<T> {
        let mut o = self.pose.transform_point(&Vec3::zero());
        o.z = self.mount_height;
        o
    }

    /// Beam angles in the base frame, ascending.
    pub fn beam_angles(&self) -> Vec<T> {
        let half = self.beam_span * T::lit(0.5);
        let step = self.beam_span / T::from_usize_lossy(self.beam_count - 1);
        (0..self.beam_count)
            .map(|i| -half + step * T::from_usize_lossy(i))
            .collect()
    }
}

/// Ray-traced camera-frame depth; pixels without a hit are zero.
pub fn render_depth<T: Real>(scene: &SceneSpec<T>, cam: &CameraModel<T>) -> DepthImage<T> {
    let rot = cam.extrinsic.rotation().transpose();
    let origin = cam.center();
    let mut img = DepthImage::zeros(cam.width, cam.height);
    for row in 0..cam.height {
        for col in 0..cam.width {
            let d_cam = cam.unproject_camera(T::from_usize_lossy(col), T::from_usize_lossy(row), T::one());
            // d_cam.z = 1, so the ray parameter equals camera depth
            let dir = rot.mul_vec(&d_cam);
            if let Some(t) = scene.raycast(&origin, &dir, true) {
                img.set(col, row, t);
            }
        }
    }
    img
}

/// Horizontal beams at mount height against boxes and walls; misses are dropped.
pub fn simulate_laser<T: Real>(scene: &SceneSpec<T>, rig: &SensorRig<T>) -> LaserScan2D<T> {
    let origin = rig.laser_origin();
    let rot = rig.pose.rotation();
    let points = rig
        .beam_angles()
        .into_iter()
        .filter_map(|a| {
            let (s, c) = a.sin_cos();
            let mut dir = rot.mul_vec(&Vec3::new(c, s, T::zero()));
            dir.z = T::zero();
            let t = scene.raycast(&origin, &dir, false)?;
            let mut p = origin + dir.scale(t);
            p.z = rig.mount_height;
            Some(p)
        })
        .collect();
    LaserScan2D::new(points, rig.mount_height).expect("points lie at mount height")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::backproject_depth;
    use crate::synth::scene::{BoxSolid, Wall};

    fn rig(pose: Pose<f64>) -> SensorRig<f64> {
        SensorRig::new(Intrinsics::default_160x120(), 1.6, 1.2, 64, std::f64::consts::PI, pose).unwrap()
    }

    #[test]
    fn camera_looking_up_sees_nothing() {
        let scene = SceneSpec::<f64>::empty(10.0);
        // camera z axis → world +z
        let cam_to_world = Pose::from_translation(Vec3::new(0.0, 0.0, 1.5));
        let cam = Intrinsics::default_160x120().camera(cam_to_world.inverse()).unwrap();
        assert_eq!(render_depth(&scene, &cam).valid_count(), 0);
    }

    #[test]
    fn wall_perpendicular_to_axis() {
        let d = 6.0;
        let w = Wall { a: (d, -8.0), b: (d, 8.0), height: 4.0 };
        let scene = SceneSpec::new(10.0, vec![], vec![w]).unwrap();
        let cam = rig(Pose::identity()).camera();
        let depth = render_depth(&scene, &cam);
        assert!((depth.get(80, 60) - d).abs() < 1e-12);
    }

    #[test]
    fn rendered_points_lie_on_surfaces() {
        let scene = SceneSpec::new(
            10.0,
            vec![BoxSolid::on_ground(4.0, 1.0, 1.0, 1.5, 2.0)],
            vec![Wall { a: (7.0, -9.0), b: (7.0, 9.0), height: 3.0 }],
        )
        .unwrap();
        let cam = rig(Pose::from_yaw(0.1, Vec3::new(0.0, -0.5, 0.0))).camera();
        let cloud = backproject_depth(&cam, &render_depth(&scene, &cam)).unwrap();
        assert!(cloud.len() > 1000);
        for p in cloud.points() {
            assert!(scene.surface_distance(p) < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn laser_examples() {
        let empty = SceneSpec::<f64>::empty(10.0);
        assert!(simulate_laser(&empty, &rig(Pose::identity())).is_empty());

        let w = 5.0;
        let walls = vec![
            Wall { a: (-w, -w), b: (w, -w), height: 3.0 },
            Wall { a: (w, -w), b: (w, w), height: 3.0 },
            Wall { a: (w, w), b: (-w, w), height: 3.0 },
            Wall { a: (-w, w), b: (-w, -w), height: 3.0 },
        ];
        let room = SceneSpec::new(10.0, vec![], walls).unwrap();
        let r = SensorRig { beam_span: 2.0 * std::f64::consts::PI * 0.99, ..rig(Pose::identity()) };
        let scan = simulate_laser(&room, &r);
        assert_eq!(scan.len(), 64);
        for p in scan.points() {
            let range = (p.x * p.x + p.y * p.y).sqrt();
            assert!(range >= w - 1e-9 && range <= w * 2f64.sqrt() + 1e-9);
            assert_eq!(p.z, 1.2);
        }

        let d = 4.0;
        let b = BoxSolid::on_ground(d, 0.0, 1.0, 3.0, 2.0);
        let scene = SceneSpec::new(10.0, vec![b], vec![]).unwrap();
        let r = SensorRig { beam_count: 65, ..rig(Pose::identity()) };
        let scan = simulate_laser(&scene, &r);
        let forward = scan.points().iter().find(|p| p.y.abs() < 1e-12).unwrap();
        assert!((forward.x - (d - 0.5)).abs() < 1e-12);
    }
}
