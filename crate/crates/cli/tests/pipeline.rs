use std::fs;
use std::path::Path;

use plrefine::io::{read_ply, write_model, write_ply};
use plrefine::refinement::RefinementModel;
use plrefine::PointCloud;
use plrefine_cli::run;

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["plrefine"];
    full.extend_from_slice(args);
    run(full)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, frames: &str) {
    assert_eq!(cli(&["synth", "--output", p(dir), "--seed", "4", "--frames", frames]), 0);
}

fn metric(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn full_pipeline_on_five_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let (data, masks, model, refined, eval) =
        (root.join("data"), root.join("masks"), root.join("model"), root.join("refined"), root.join("eval"));
    let cfg = root.join("run.cfg");
    fs::write(&cfg, "epochs = 3\nmax_points_per_sample = 300\n").unwrap();
    synth(&data, "5");
    assert_eq!(cli(&["mask", "--input", p(&data), "--output", p(&masks)]), 0);
    assert_eq!(cli(&["refine-train", "--config", p(&cfg), "--input", p(&data), "--output", p(&model)]), 0);
    let model_file = model.join("model.plr");
    assert_eq!(
        cli(&["refine-apply", "--input", p(&data), "--model", p(&model_file), "--output", p(&refined)]),
        0
    );
    assert_eq!(
        cli(&["eval", "--input", p(&data), "--refined", p(&refined), "--output", p(&eval)]),
        0
    );
    for i in 0..5 {
        let f = format!("frame_{i:04}");
        for file in ["depth.pfm", "cloud.ply", "scan.csv", "poses.txt", "map.ply", "corrupted.ply", "camera.txt"] {
            assert!(data.join(&f).join(file).is_file(), "{f}/{file}");
        }
        assert!(masks.join(&f).join("mask.pfm").is_file());
        assert!(refined.join(&f).join("refined.ply").is_file());
    }
    let loss = fs::read_to_string(model.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 4);
    let report = fs::read_to_string(eval.join("report.txt")).unwrap();
    let header = report.lines().nth(1).unwrap();
    let cols: Vec<&str> = header.split_whitespace().collect();
    assert_eq!(cols, ["method", "AbsRel", "SqRel", "RMSE", "d1", "d2", "d3", "EMD", "EFS"]);
    let refined_row = report.lines().find(|l| l.starts_with("refined")).unwrap();
    assert_eq!(refined_row.split_whitespace().filter(|t| *t == "NA").count(), 6);
}

#[test]
fn eval_of_map_against_itself_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "2");
    for i in 0..2 {
        let f = data.join(format!("frame_{i:04}"));
        fs::copy(f.join("corrupted.ply"), f.join("map.ply")).unwrap();
    }
    let eval = tmp.path().join("eval");
    assert_eq!(cli(&["eval", "--input", p(&data), "--output", p(&eval)]), 0);
    let kv = fs::read_to_string(eval.join("metrics.txt")).unwrap();
    assert_eq!(metric(&kv, "corrupted.emd"), 0.0);
    assert_eq!(metric(&kv, "corrupted.efs"), 0.0);
}

#[test]
fn zero_model_leaves_clouds_unchanged() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "2");
    let model = tmp.path().join("zero.plr");
    write_model(&model, &RefinementModel::<f64>::zero(9).unwrap()).unwrap();
    let out = tmp.path().join("refined");
    assert_eq!(
        cli(&["refine-apply", "--input", p(&data), "--model", p(&model), "--output", p(&out)]),
        0
    );
    for i in 0..2 {
        let f = format!("frame_{i:04}");
        let a: PointCloud<f64> = read_ply(&data.join(&f).join("corrupted.ply")).unwrap();
        let b: PointCloud<f64> = read_ply(&out.join(&f).join("refined.ply")).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn frame_selection() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "3");
    let cfg = tmp.path().join("c.cfg");
    fs::write(&cfg, "first_frame=1\n").unwrap();
    let out = tmp.path().join("m");
    assert_eq!(cli(&["mask", "--config", p(&cfg), "--input", p(&data), "--output", p(&out)]), 0);
    assert!(!out.join("frame_0000").exists());
    assert!(out.join("frame_0001/mask.pfm").is_file());
    assert!(out.join("frame_0002/mask.pfm").is_file());
    // more frames than present
    assert_eq!(cli(&["mask", "--input", p(&data), "--output", p(&out), "--frames", "4"]), 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(cli(&["--help"]), 0);
    assert_eq!(cli(&[]), 1);
    assert_eq!(cli(&["nonsense"]), 1);
    assert_eq!(cli(&["synth", "--seed", "x", "--output", p(&out)]), 1);
    assert_eq!(cli(&["synth"]), 1);
    assert_eq!(cli(&["synth", "--frames", "0", "--output", p(&out)]), 1);
    assert_eq!(cli(&["eval", "--output", p(&out)]), 1);
    assert_eq!(cli(&["refine-apply", "--input", p(tmp.path()), "--output", p(&out)]), 1);

    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "sigma=0\n").unwrap();
    assert_eq!(cli(&["synth", "--config", p(&bad), "--output", p(&out)]), 1);
    let missing = tmp.path().join("missing.cfg");
    assert_eq!(cli(&["synth", "--config", p(&missing), "--output", p(&out)]), 1);

    assert_eq!(cli(&["mask", "--input", p(&tmp.path().join("nope")), "--output", p(&out)]), 2);
    let data = tmp.path().join("data");
    synth(&data, "1");
    fs::remove_file(data.join("frame_0000/scan.csv")).unwrap();
    assert_eq!(cli(&["mask", "--input", p(&data), "--output", p(&out)]), 2);
    fs::write(data.join("frame_0000/scan.csv"), "garbage\n").unwrap();
    assert_eq!(cli(&["mask", "--input", p(&data), "--output", p(&out)]), 2);
}

#[test]
fn truncated_cloud_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "1");
    let f = data.join("frame_0000");
    let cloud: PointCloud<f64> = read_ply(&f.join("corrupted.ply")).unwrap();
    let short = PointCloud::new(cloud.points()[..10].to_vec()).unwrap();
    write_ply(&f.join("corrupted.ply"), &short).unwrap();
    assert_eq!(cli(&["eval", "--input", p(&data), "--output", p(&tmp.path().join("e"))]), 2);
}
