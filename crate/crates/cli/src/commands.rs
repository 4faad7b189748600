//! The five pipeline commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use plrefine::io::{
    read_camera, read_model, read_pfm, read_ply, read_poses, read_scan, write_camera, write_model,
    write_pfm, write_ply, write_poses, write_scan,
};
use plrefine::metrics::{cloud_metrics, depth_metrics, CloudMetricParams, CloudMetrics, DepthMetrics};
use plrefine::refinement::{apply_refinement, train_refinement, RefinementModel, TrainingSample};
use plrefine::spatial::{build_confidence_grid, ConfidenceGrid};
use plrefine::synth::generate_dataset_with;
use plrefine::{build_3d_mask, CameraModel, DepthImage, LaserScan2D, LocalMap, PointCloud};

use crate::{CliError, CliResult, Common, RunConfig};

pub const DEPTH_FILE: &str = "depth.pfm";
pub const CLOUD_FILE: &str = "cloud.ply";
pub const SCAN_FILE: &str = "scan.csv";
pub const POSES_FILE: &str = "poses.txt";
pub const MAP_FILE: &str = "map.ply";
pub const CORRUPTED_FILE: &str = "corrupted.ply";
pub const CAMERA_FILE: &str = "camera.txt";
pub const MASK_FILE: &str = "mask.pfm";
pub const REFINED_FILE: &str = "refined.ply";
pub const MODEL_FILE: &str = "model.plr";
pub const LOSS_FILE: &str = "loss.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const METRICS_FILE: &str = "metrics.txt";

const DEFAULT_SYNTH_FRAMES: usize = 5;

pub fn frame_name(i: usize) -> String {
    format!("frame_{i:04}")
}

fn load_config(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if c.frames.is_some() {
        cfg.frames = c.frames;
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

fn required<'a>(v: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    v.as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

fn output_dir(c: &Common) -> CliResult<&Path> {
    let out = required(&c.output, "output")?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    Ok(out)
}

fn with_path<T>(path: &Path, r: plrefine::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Frame directories selected by `first_frame` and `frames`, in index order.
pub fn select_frames(input: &Path, cfg: &RunConfig) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(input)
        .map_err(|e| CliError::Data(format!("cannot read dataset {}: {e}", input.display())))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let is_frame = name
            .strip_prefix("frame_")
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()));
        if is_frame && entry.path().is_dir() {
            names.push(name);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(CliError::Data(format!("no frame directories in {}", input.display())));
    }
    let start = cfg.first_frame;
    let end = match cfg.frames {
        Some(n) => start + n,
        None => names.len(),
    };
    if start >= end || end > names.len() {
        return Err(CliError::Data(format!(
            "requested frames {start}..{end} but {} has {}",
            input.display(),
            names.len()
        )));
    }
    Ok(names[start..end]
        .iter()
        .map(|n| (n.clone(), input.join(n)))
        .collect())
}

fn frame_output(out: &Path, name: &str) -> CliResult<PathBuf> {
    let dir = out.join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn cmd_synth(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let out = output_dir(c)?;
    let seed = c.seed.unwrap_or(cfg.scene_seed);
    let n = cfg.frames.unwrap_or(DEFAULT_SYNTH_FRAMES);
    let data = generate_dataset_with::<f64>(seed, n, &cfg.corruption(), &cfg.dataset())?;
    for (i, s) in data.iter().enumerate() {
        let dir = frame_output(out, &frame_name(cfg.first_frame + i))?;
        write_pfm(&dir.join(DEPTH_FILE), &s.gt_depth)?;
        write_ply(&dir.join(CLOUD_FILE), &s.gt_cloud)?;
        write_scan(&dir.join(SCAN_FILE), &s.scan)?;
        write_poses(&dir.join(POSES_FILE), &s.poses)?;
        write_ply(&dir.join(MAP_FILE), s.local_map.cloud())?;
        write_ply(&dir.join(CORRUPTED_FILE), &s.corrupted_cloud)?;
        write_camera(&dir.join(CAMERA_FILE), &s.camera)?;
    }
    println!("wrote {n} frames to {}", out.display());
    Ok(())
}

pub fn cmd_mask(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let input = required(&c.input, "input")?;
    let frames = select_frames(input, &cfg)?;
    let out = output_dir(c)?;
    for (name, dir) in &frames {
        let cam: CameraModel<f64> = read(dir, CAMERA_FILE, read_camera)?;
        let scan: LaserScan2D<f64> = read(dir, SCAN_FILE, read_scan)?;
        let mask = build_3d_mask(&cam, &scan, cfg.below, cfg.above);
        write_pfm(&frame_output(out, name)?.join(MASK_FILE), &mask)?;
    }
    println!("wrote {} masks to {}", frames.len(), out.display());
    Ok(())
}

fn read<T>(dir: &Path, file: &str, f: impl Fn(&Path) -> plrefine::Result<T>) -> CliResult<T> {
    let path = dir.join(file);
    with_path(&path, f(&path))
}

fn grid(cfg: &RunConfig, scan: &LaserScan2D<f64>, dir: &Path) -> CliResult<ConfidenceGrid<f64>> {
    with_path(&dir.join(SCAN_FILE), build_confidence_grid(scan, cfg.sigma, cfg.cell, cfg.grid_padding))
}

fn training_sample(cfg: &RunConfig, dir: &Path) -> CliResult<TrainingSample<f64>> {
    let cloud: PointCloud<f64> = read(dir, CORRUPTED_FILE, read_ply)?;
    let scan = read(dir, SCAN_FILE, read_scan)?;
    let map_cloud: PointCloud<f64> = read(dir, MAP_FILE, read_ply)?;
    let poses = read(dir, POSES_FILE, read_poses::<f64>)?;
    let newest = poses
        .last()
        .ok_or_else(|| CliError::Data(format!("{}: no poses", dir.join(POSES_FILE).display())))?;
    let map = LocalMap::from_cloud(&map_cloud, newest.translation(), cfg.map_thresh)?;
    let grid = grid(cfg, &scan, dir)?;
    Ok(TrainingSample { cloud, scan, grid, map })
}

pub fn cmd_refine_train(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let input = required(&c.input, "input")?;
    let frames = select_frames(input, &cfg)?;
    let out = output_dir(c)?;
    let samples = frames
        .iter()
        .map(|(_, dir)| training_sample(&cfg, dir))
        .collect::<CliResult<Vec<_>>>()?;
    let mut train = cfg.training();
    if let Some(s) = c.seed {
        train.seed = s;
    }
    let mut model = RefinementModel::<f64>::seeded(cfg.k, train.seed)?;
    model.reject_radius = cfg.reject_radius;
    model.offset_clamp = cfg.offset_clamp;
    let (model, history) = train_refinement(&model, &samples, &train)?;
    write_model(&out.join(MODEL_FILE), &model)?;
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        writeln!(csv, "{},{l}", i + 1).expect("string write");
    }
    write_text(&out.join(LOSS_FILE), &csv)?;
    println!(
        "trained on {} frames, final loss {}",
        frames.len(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn cmd_refine_apply(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let input = required(&c.input, "input")?;
    let model_path = required(&c.model, "model")?;
    let model: RefinementModel<f64> = with_path(model_path, read_model(model_path))?;
    let frames = select_frames(input, &cfg)?;
    let out = output_dir(c)?;
    for (name, dir) in &frames {
        let cloud: PointCloud<f64> = read(dir, CORRUPTED_FILE, read_ply)?;
        let scan = read(dir, SCAN_FILE, read_scan)?;
        let grid = grid(&cfg, &scan, dir)?;
        let refined = with_path(dir, apply_refinement(&model, &cloud, &scan, &grid))?;
        write_ply(&frame_output(out, name)?.join(REFINED_FILE), &refined)?;
    }
    println!("refined {} frames into {}", frames.len(), out.display());
    Ok(())
}

/// Places each point's camera depth at the pixel it was back-projected from.
///
/// `cloud` must list one point per valid pixel of `gt` in row-major order.
pub fn depth_at_source_pixels(
    cloud: &PointCloud<f64>,
    gt: &DepthImage<f64>,
    cam: &CameraModel<f64>,
) -> CliResult<DepthImage<f64>> {
    if cloud.len() != gt.valid_count() {
        return Err(CliError::Data(format!(
            "cloud has {} points but the depth image has {} valid pixels",
            cloud.len(),
            gt.valid_count()
        )));
    }
    let mut points = cloud.points().iter();
    let data = gt
        .data()
        .iter()
        .map(|&g| {
            if g > 0.0 {
                let p = points.next().expect("counts checked");
                cam.extrinsic.transform_point(p).z.max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(DepthImage::new(gt.width(), gt.height(), data)?)
}

#[derive(Debug, Clone, Copy)]
struct FrameEval {
    depth: DepthMetrics<f64>,
    corrupted: CloudMetrics<f64>,
    refined: Option<CloudMetrics<f64>>,
}

fn fmt_row(out: &mut String, label: &str, depth: Option<[f64; 6]>, emd: f64, efs: f64) {
    write!(out, "{label:<10}").expect("string write");
    match depth {
        Some(d) => {
            for v in d {
                write!(out, " {v:>9.4}").expect("string write");
            }
        }
        None => {
            for _ in 0..6 {
                write!(out, " {:>9}", "NA").expect("string write");
            }
        }
    }
    writeln!(out, " {emd:>9.4} {efs:>9.5}").expect("string write");
}

fn depth_array(d: &DepthMetrics<f64>) -> [f64; 6] {
    [d.abs_rel, d.sq_rel, d.rmse, d.delta_1, d.delta_2, d.delta_3]
}

fn mean<I: Iterator<Item = f64>>(it: I, n: usize) -> f64 {
    it.sum::<f64>() / n as f64
}

pub fn cmd_eval(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let input = required(&c.input, "input")?;
    let frames = select_frames(input, &cfg)?;
    let params = CloudMetricParams {
        emd_cap: cfg.emd_cap,
        seed: c.seed.unwrap_or(cfg.emd_seed),
        efs_max_dist: cfg.efs_max_dist,
    };
    let mut evals = Vec::with_capacity(frames.len());
    for (name, dir) in &frames {
        let gt: DepthImage<f64> = read(dir, DEPTH_FILE, read_pfm)?;
        let cam: CameraModel<f64> = read(dir, CAMERA_FILE, read_camera)?;
        let corrupted: PointCloud<f64> = read(dir, CORRUPTED_FILE, read_ply)?;
        let map: PointCloud<f64> = read(dir, MAP_FILE, read_ply)?;
        let pred = depth_at_source_pixels(&corrupted, &gt, &cam)?;
        let depth = with_path(&dir.join(CORRUPTED_FILE), depth_metrics(&pred, &gt))?;
        let corrupted = with_path(dir, cloud_metrics(&corrupted, &map, &params))?;
        let refined = match &c.refined {
            Some(r) => {
                let rdir = r.join(name);
                let cloud: PointCloud<f64> = read(&rdir, REFINED_FILE, read_ply)?;
                Some(with_path(&rdir, cloud_metrics(&cloud, &map, &params))?)
            }
            None => None,
        };
        evals.push(FrameEval { depth, corrupted, refined });
    }
    let n = evals.len();
    let out = output_dir(c)?;

    let depth_mean: Vec<f64> = (0..6)
        .map(|j| mean(evals.iter().map(|e| depth_array(&e.depth)[j]), n))
        .collect();
    let mut report = format!("frames {n}\n");
    writeln!(
        report,
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "method", "AbsRel", "SqRel", "RMSE", "d1", "d2", "d3", "EMD", "EFS"
    )
    .expect("string write");
    fmt_row(
        &mut report,
        "corrupted",
        Some(depth_mean.clone().try_into().expect("six values")),
        mean(evals.iter().map(|e| e.corrupted.emd), n),
        mean(evals.iter().map(|e| e.corrupted.efs), n),
    );
    let refined: Option<Vec<CloudMetrics<f64>>> = evals.iter().map(|e| e.refined).collect();
    if let Some(r) = &refined {
        fmt_row(
            &mut report,
            "refined",
            None,
            mean(r.iter().map(|m| m.emd), n),
            mean(r.iter().map(|m| m.efs), n),
        );
    }

    let mut kv = format!("frames={n}\n");
    let depth_keys = ["abs_rel", "sq_rel", "rmse", "delta_1", "delta_2", "delta_3"];
    let cloud_kv = |kv: &mut String, prefix: &str, m: &CloudMetrics<f64>| {
        writeln!(kv, "{prefix}.emd={}", m.emd).expect("string write");
        writeln!(kv, "{prefix}.efs={}", m.efs).expect("string write");
        writeln!(kv, "{prefix}.efs_sum={}", m.efs_sum).expect("string write");
        writeln!(kv, "{prefix}.efs_n_used={}", m.n_used).expect("string write");
    };
    for (key, v) in depth_keys.iter().zip(&depth_mean) {
        writeln!(kv, "corrupted.{key}={v}").expect("string write");
    }
    writeln!(kv, "corrupted.emd={}", mean(evals.iter().map(|e| e.corrupted.emd), n)).expect("string write");
    writeln!(kv, "corrupted.efs={}", mean(evals.iter().map(|e| e.corrupted.efs), n)).expect("string write");
    if let Some(r) = &refined {
        writeln!(kv, "refined.emd={}", mean(r.iter().map(|m| m.emd), n)).expect("string write");
        writeln!(kv, "refined.efs={}", mean(r.iter().map(|m| m.efs), n)).expect("string write");
    }
    for ((name, _), e) in frames.iter().zip(&evals) {
        for (key, v) in depth_keys.iter().zip(depth_array(&e.depth)) {
            writeln!(kv, "{name}.corrupted.{key}={v}").expect("string write");
        }
        cloud_kv(&mut kv, &format!("{name}.corrupted"), &e.corrupted);
        if let Some(r) = &e.refined {
            cloud_kv(&mut kv, &format!("{name}.refined"), r);
        }
    }
    write_text(&out.join(REPORT_FILE), &report)?;
    write_text(&out.join(METRICS_FILE), &kv)?;
    print!("{report}");
    Ok(())
}
