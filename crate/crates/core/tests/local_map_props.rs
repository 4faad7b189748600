use plrefine::{build_local_map, PointCloud, Pose, ScanBuffer, Vec3};
use proptest::prelude::*;

fn scan() -> impl Strategy<Value = (PointCloud<f64>, Pose<f64>)> {
    (
        prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0, -1.0f64..3.0), 0..60),
        -3.1f64..3.1,
        -5.0f64..5.0,
        -5.0f64..5.0,
    )
        .prop_map(|(pts, yaw, x, y)| {
            let cloud = PointCloud::new(pts.into_iter().map(|(a, b, c)| Vec3::new(a, b, c)).collect()).unwrap();
            (cloud, Pose::from_yaw(yaw, Vec3::new(x, y, 0.0)))
        })
}

fn keys(c: &PointCloud<f64>) -> Vec<[u64; 3]> {
    let mut v: Vec<[u64; 3]> = c.points().iter().map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]).collect();
    v.sort_unstable();
    v
}

proptest! {
    #[test]
    fn map_contract(scans in prop::collection::vec(scan(), 1..9), thresh in 0.5f64..30.0, rot in 0usize..8) {
        let mut buf = ScanBuffer::new();
        for (c, p) in &scans {
            buf.push(c.clone(), *p);
        }
        let kept = &scans[scans.len().saturating_sub(5)..];
        let map = build_local_map(&buf, None, thresh).unwrap();
        let center = kept.last().unwrap().1.translation();
        prop_assert_eq!(map.center(), center);
        prop_assert!(map.cloud().points().iter().all(|p| p.distance(&center) <= thresh));
        prop_assert!(map.cloud().len() <= kept.iter().map(|(c, _)| c.len()).sum::<usize>());

        let mut reordered = kept.to_vec();
        reordered.rotate_left(rot % kept.len());
        let mut buf2 = ScanBuffer::new();
        for (c, p) in reordered {
            buf2.push(c, p);
        }
        let map2 = build_local_map(&buf2, Some(center), thresh).unwrap();
        prop_assert_eq!(keys(map.cloud()), keys(map2.cloud()));
    }
}

#[test]
fn empty_buffer_is_an_error() {
    assert!(build_local_map(&ScanBuffer::<f64>::new(), None, 5.0).is_err());
}
