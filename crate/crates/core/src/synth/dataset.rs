use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{backproject_depth, CameraModel, DepthImage, PointCloud, Pose, Vec3};
use crate::laser::{LaserScan2D, DEFAULT_MOUNT_HEIGHT};
use crate::local_map::{build_local_map, LocalMap, ScanBuffer, BUFFER_CAPACITY};
use crate::scalar::Real;

use super::corrupt::{corrupt_cloud, CorruptionSpec};
use super::rig::{render_depth, simulate_laser, Intrinsics, SensorRig};
use super::scene::{BoxSolid, SceneSpec, Wall};

/// Knobs for [`generate_dataset_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig<T> {
    pub intrinsics: Intrinsics<T>,
    pub camera_height: T,
    pub mount_height: T,
    pub beam_count: usize,
    pub beam_span: T,
    /// Half-size of the square world.
    pub extent: T,
    /// Local map crop radius.
    pub map_thresh: T,
    /// Distance between consecutive trajectory poses.
    pub step: T,
    /// Pixel decimation of the range sweeps that feed the local map.
    pub sweep_decimation: usize,
}

impl<T: Real> Default for DatasetConfig<T> {
    fn default() -> Self {
        Self {
            intrinsics: Intrinsics::default_160x120(),
            camera_height: T::lit(1.6),
            mount_height: T::lit(DEFAULT_MOUNT_HEIGHT),
            beam_count: 64,
            beam_span: T::PI(),
            extent: T::lit(10.0),
            map_thresh: T::lit(20.0),
            step: T::lit(0.3),
            sweep_decimation: 2,
        }
    }
}

impl<T: Real> DatasetConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.extent > T::lit(3.0)) {
            return Err(Error::InvalidArgument("dataset extent must exceed 3 m".into()));
        }
        if !(self.map_thresh > T::zero()) || !(self.step >= T::zero()) {
            return Err(Error::InvalidArgument("map threshold and step must be positive".into()));
        }
        if self.sweep_decimation == 0 {
            return Err(Error::InvalidArgument("sweep decimation must be at least 1".into()));
        }
        if !(self.camera_height > T::zero() && self.camera_height < self.extent) {
            return Err(Error::InvalidArgument("camera height must lie inside the scene".into()));
        }
        Ok(())
    }
}

/// One labeled frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample<T> {
    pub gt_depth: DepthImage<T>,
    pub gt_cloud: PointCloud<T>,
    pub scan: LaserScan2D<T>,
    pub local_map: LocalMap<T>,
    pub corrupted_cloud: PointCloud<T>,
    /// Camera of the newest pose.
    pub camera: CameraModel<T>,
    /// Camera → world for every sweep in the map buffer, oldest first.
    pub poses: Vec<Pose<T>>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent seed for frame `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

/// Random room: 2 to 4 boundary walls and 3 to 8 boxes taller than the laser plane.
pub fn random_scene<T: Real>(seed: u64, extent: T) -> Result<SceneSpec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = extent.to_f64_lossy();
    let side = e - 0.5;
    let mut sides = [0usize, 1, 2, 3];
    sides.shuffle(&mut rng);
    let n_walls = rng.random_range(2..=4);
    let corners = [(side, -side), (side, side), (-side, side), (-side, -side)];
    let walls = sides[..n_walls]
        .iter()
        .map(|&s| {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            Wall {
                a: (T::lit(a.0), T::lit(a.1)),
                b: (T::lit(b.0), T::lit(b.1)),
                height: T::lit(rng.random_range(2.5..3.5)),
            }
        })
        .collect();
    let n_boxes = rng.random_range(3..=8);
    let reach = e * 0.7;
    let boxes = (0..n_boxes)
        .map(|_| {
            BoxSolid::on_ground(
                T::lit(rng.random_range(-reach..reach)),
                T::lit(rng.random_range(-reach..reach)),
                T::lit(rng.random_range(0.6..2.0)),
                T::lit(rng.random_range(0.6..2.0)),
                T::lit(rng.random_range(1.4..2.5)),
            )
        })
        .collect();
    SceneSpec::new(extent, boxes, walls)
}

/// Whether the rig footprint at `(x, y)` keeps clear of every solid.
fn clear_of_solids<T: Real>(scene: &SceneSpec<T>, x: T, y: T, margin: T) -> bool {
    let p = Vec3::new(x, y, T::lit(0.5));
    let boxes_clear = scene.boxes.iter().all(|b| {
        (p.x - b.center.x).abs() > b.size.x * T::lit(0.5) + margin
            || (p.y - b.center.y).abs() > b.size.y * T::lit(0.5) + margin
    });
    let inside = x.abs() < scene.extent - T::lit(1.0) && y.abs() < scene.extent - T::lit(1.0);
    boxes_clear && inside
}

/// Straight trajectory of `BUFFER_CAPACITY` rig poses, oldest first, whose
/// newest pose sees at least a quarter of the laser beams return.
fn sample_trajectory<T: Real>(
    scene: &SceneSpec<T>,
    cfg: &DatasetConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Pose<T>>> {
    let step = cfg.step;
    let min_hits = cfg.beam_count.div_ceil(4);
    let reach = (scene.extent - T::lit(1.5)).to_f64_lossy();
    let margin = T::lit(0.5);
    for _ in 0..1000 {
        let x0 = T::lit(rng.random_range(-reach..reach));
        let y0 = T::lit(rng.random_range(-reach..reach));
        let yaw = T::lit(rng.random_range(-PI..PI));
        let (s, c) = yaw.sin_cos();
        let poses: Vec<Pose<T>> = (0..BUFFER_CAPACITY)
            .map(|i| {
                let d = step * T::from_usize_lossy(i);
                Pose::from_yaw(yaw, Vec3::new(x0 + c * d, y0 + s * d, T::zero()))
            })
            .collect();
        let clear = poses.iter().all(|p| {
            let t = p.translation();
            clear_of_solids(scene, t.x, t.y, margin)
        });
        if !clear {
            continue;
        }
        let rig = SensorRig::new(
            cfg.intrinsics,
            cfg.camera_height,
            cfg.mount_height,
            cfg.beam_count,
            cfg.beam_span,
            poses[BUFFER_CAPACITY - 1],
        )?;
        if simulate_laser(scene, &rig).len() >= min_hits {
            return Ok(poses);
        }
    }
    Err(Error::InvalidArgument("scene leaves no free space for the rig".into()))
}

fn sweep_intrinsics<T: Real>(cfg: &DatasetConfig<T>) -> Intrinsics<T> {
    let d = cfg.sweep_decimation;
    let f = T::from_usize_lossy(d);
    let i = cfg.intrinsics;
    Intrinsics {
        fx: i.fx / f,
        fy: i.fy / f,
        cx: i.cx / f,
        cy: i.cy / f,
        width: i.width.div_ceil(d),
        height: i.height.div_ceil(d),
    }
}

/// Renders one frame of `scene` along `trajectory` (rig poses, oldest first).
pub fn render_sample<T: Real>(
    scene: &SceneSpec<T>,
    trajectory: &[Pose<T>],
    cfg: &DatasetConfig<T>,
    corruption: &CorruptionSpec<T>,
) -> Result<SynthSample<T>> {
    let newest = *trajectory
        .last()
        .ok_or(Error::Empty("trajectory has no poses"))?;
    let rig_at = |pose: Pose<T>| {
        SensorRig::new(
            cfg.intrinsics,
            cfg.camera_height,
            cfg.mount_height,
            cfg.beam_count,
            cfg.beam_span,
            pose,
        )
    };
    let rig = rig_at(newest)?;
    let camera = rig.camera();
    let gt_depth = render_depth(scene, &camera);
    let gt_cloud = backproject_depth(&camera, &gt_depth)?;
    let scan = simulate_laser(scene, &rig);

    let sweep = sweep_intrinsics(cfg);
    let sensor_cam = sweep.camera(Pose::identity())?;
    let mut buffer = ScanBuffer::new();
    let mut poses = Vec::with_capacity(trajectory.len());
    for pose in trajectory {
        let cam_to_world = rig_at(*pose)?.camera_to_world();
        let world_cam = sweep.camera(cam_to_world.inverse())?;
        let depth = render_depth(scene, &world_cam);
        buffer.push(backproject_depth(&sensor_cam, &depth)?, cam_to_world);
        poses.push(cam_to_world);
    }
    let local_map = build_local_map(&buffer, None, cfg.map_thresh)?;
    let corrupted_cloud = corrupt_cloud(&gt_cloud, &gt_depth, &camera, corruption)?;
    Ok(SynthSample {
        gt_depth,
        gt_cloud,
        scan,
        local_map,
        corrupted_cloud,
        camera,
        poses,
    })
}

/// Default-configured dataset; see [`generate_dataset_with`].
pub fn generate_dataset<T: Real>(
    scene_seed: u64,
    n_frames: usize,
    corruption: &CorruptionSpec<T>,
) -> Result<Vec<SynthSample<T>>> {
    generate_dataset_with(scene_seed, n_frames, corruption, &DatasetConfig::default())
}

/// `n_frames` samples of one static random scene, each from its own
/// straight 5-pose trajectory. Frame `i` draws its trajectory and corruption
/// noise from seeds derived from `(scene_seed, i)` and `(corruption.seed, i)`.
pub fn generate_dataset_with<T: Real>(
    scene_seed: u64,
    n_frames: usize,
    corruption: &CorruptionSpec<T>,
    cfg: &DatasetConfig<T>,
) -> Result<Vec<SynthSample<T>>> {
    if n_frames == 0 {
        return Err(Error::InvalidArgument("at least one frame is required".into()));
    }
    cfg.validate()?;
    corruption.validate()?;
    let scene = random_scene(scene_seed, cfg.extent)?;
    (0..n_frames as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene_seed, i));
            let trajectory = sample_trajectory(&scene, cfg, &mut rng)?;
            let spec = CorruptionSpec {
                seed: derive_seed(corruption.seed, i),
                ..*corruption
            };
            render_sample(&scene, &trajectory, cfg, &spec)
        })
        .collect()
}
