use plrefine::{CameraModel, Pose, Vec3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn pose() -> impl Strategy<Value = Pose<f64>> {
    (vec3(1.0), -3.1f64..3.1, vec3(20.0))
        .prop_filter("axis", |(a, _, _)| a.norm() > 1e-3)
        .prop_map(|(axis, angle, t)| Pose::from_axis_angle(axis, angle, t))
}

proptest! {
    #[test]
    fn poses_preserve_distances(p in pose(), a in vec3(50.0), b in vec3(50.0)) {
        let d0 = a.distance(&b);
        let d1 = p.transform_point(&a).distance(&p.transform_point(&b));
        prop_assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
    }

    #[test]
    fn composition_is_associative(a in pose(), b in pose(), c in pose(), x in vec3(30.0)) {
        let left = a.compose(&b).compose(&c).transform_point(&x);
        let right = a.compose(&b.compose(&c)).transform_point(&x);
        prop_assert!(left.distance(&right) < 1e-9);
    }

    #[test]
    fn composition_applies_right_first(a in pose(), b in pose(), x in vec3(30.0)) {
        let direct = a.transform_point(&b.transform_point(&x));
        prop_assert!(a.compose(&b).transform_point(&x).distance(&direct) < 1e-9);
    }

    #[test]
    fn inverse_undoes(p in pose(), x in vec3(30.0)) {
        let back = p.inverse().transform_point(&p.transform_point(&x));
        prop_assert!(back.distance(&x) < 1e-9);
        prop_assert!(p.rotation().determinant() > 0.0);
    }

    #[test]
    fn pose_rows_round_trip(p in pose()) {
        let q = Pose::from_rows(&p.to_rows(), 1e-3).unwrap();
        let x = Vec3::new(1.0, -2.0, 3.0);
        prop_assert!(p.transform_point(&x).distance(&q.transform_point(&x)) < 1e-12);
    }

    #[test]
    fn pixel_round_trip(
        p in pose(),
        fx in 40.0f64..600.0,
        fy in 40.0f64..600.0,
        fu in 0.0f64..1.0,
        fv in 0.0f64..1.0,
        s in 0.2f64..100.0,
    ) {
        let cam = CameraModel::new(fx, fy, 80.0, 60.0, 160, 120, p).unwrap();
        let (u, v) = (fu * 159.0, fv * 119.0);
        let w = cam.unproject(u, v, s);
        let q = cam.project(&w).expect("in view");
        prop_assert!((q.u - u).abs() < 1e-6 && (q.v - v).abs() < 1e-6);
        prop_assert!((q.depth - s).abs() < 1e-9 * s.max(1.0));
    }
}

#[test]
fn point_behind_camera_does_not_project() {
    let cam = CameraModel::new(100.0, 100.0, 80.0, 60.0, 160, 120, Pose::identity()).unwrap();
    assert!(cam.project(&Vec3::new(0.0, 0.0, -1.0)).is_none());
    assert!(cam.project(&Vec3::new(0.0, 0.0, 1.0)).is_some());
}
