use plrefine::{build_3d_mask, CameraModel, LaserScan2D, Mat3, Pose, Vec3};
use proptest::prelude::*;

/// Level camera at `(0, 0, h)` looking along world +x.
fn camera(h: f64) -> CameraModel<f64> {
    let r = Mat3::from_rows([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]);
    let cam_to_world = Pose::new(r, Vec3::new(0.0, 0.0, h)).unwrap();
    CameraModel::new(60.0, 60.0, 80.0, 60.0, 160, 120, cam_to_world.inverse()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Scaling the whole rig and scene about the ground origin leaves the
    /// mask footprint unchanged and scales its depths.
    #[test]
    fn mask_under_similarity(
        pts in prop::collection::vec((2.0f64..15.0, -0.8f64..0.8), 2..30),
        s in prop::sample::select(vec![0.5f64, 2.0, 4.0]),
    ) {
        let (h, mount, below, above) = (1.6, 1.2, 1.0, 0.8);
        // bearings sorted so consecutive beams are neighbors
        let mut pts = pts;
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let scan_pts: Vec<Vec3<f64>> = pts
            .iter()
            .map(|&(r, a)| Vec3::new(r * a.cos(), r * a.sin(), mount))
            .collect();
        let scan = LaserScan2D::new(scan_pts.clone(), mount).unwrap();
        let big = LaserScan2D::new(scan_pts.iter().map(|p| p.scale(s)).collect(), mount * s).unwrap();
        let m0 = build_3d_mask(&camera(h), &scan, below, above);
        let m1 = build_3d_mask(&camera(h * s), &big, below * s, above * s);
        for (a, b) in m0.data().iter().zip(m1.data()) {
            prop_assert_eq!(*a == 0.0, *b == 0.0);
            prop_assert!((a * s - b).abs() <= 1e-9 * b.max(1.0));
        }
    }
}

#[test]
fn single_beam_carries_its_depth() {
    let scan = LaserScan2D::new(vec![Vec3::new(5.0, 0.3, 1.2)], 1.2).unwrap();
    let cam = camera(1.6);
    let mask = build_3d_mask(&cam, &scan, 1.2, 0.8);
    let filled: Vec<f64> = mask.data().iter().copied().filter(|d| *d != 0.0).collect();
    assert!(!filled.is_empty());
    assert!(filled.iter().all(|d| *d == 5.0));
}
