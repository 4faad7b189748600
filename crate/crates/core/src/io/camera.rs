use std::path::Path;

use super::{display, parse_real, parse_usize, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Pose};
use crate::scalar::Real;

use super::POSE_DRIFT_TOLERANCE;

/// Writes `key=value` lines for the intrinsics and the world → camera extrinsic.
pub fn write_camera<T: Real>(path: &Path, cam: &CameraModel<T>) -> Result<()> {
    let rows: Vec<String> = cam.extrinsic.to_rows().iter().map(|v| v.to_string()).collect();
    let text = format!(
        "fx={}\nfy={}\ncx={}\ncy={}\nwidth={}\nheight={}\nextrinsic={}\n",
        cam.fx,
        cam.fy,
        cam.cx,
        cam.cy,
        cam.width,
        cam.height,
        rows.join(" ")
    );
    write_atomic(path, text.as_bytes())
}

pub fn read_camera<T: Real>(path: &Path) -> Result<CameraModel<T>> {
    let text = read_text(path)?;
    let (mut fx, mut fy, mut cx, mut cy) = (None, None, None, None);
    let (mut width, mut height, mut extrinsic) = (None, None, None);
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(display(path), no, "expected key=value"))?;
        let value = value.trim();
        match key.trim() {
            "fx" => fx = Some(parse_real(value, path, no)?),
            "fy" => fy = Some(parse_real(value, path, no)?),
            "cx" => cx = Some(parse_real(value, path, no)?),
            "cy" => cy = Some(parse_real(value, path, no)?),
            "width" => width = Some(parse_usize(value, path, no)?),
            "height" => height = Some(parse_usize(value, path, no)?),
            "extrinsic" => {
                let tokens: Vec<&str> = value.split_whitespace().collect();
                if tokens.len() != 12 {
                    return Err(Error::parse(display(path), no, format!("expected 12 numbers, found {}", tokens.len())));
                }
                let mut v = [T::zero(); 12];
                for (slot, t) in v.iter_mut().zip(&tokens) {
                    *slot = parse_real(t, path, no)?;
                }
                extrinsic = Some(
                    Pose::from_rows(&v, T::lit(POSE_DRIFT_TOLERANCE))
                        .map_err(|e| Error::parse(display(path), no, e.to_string()))?,
                );
            }
            other => return Err(Error::parse(display(path), no, format!("unknown key '{other}'"))),
        }
    }
    let missing = |k: &str| Error::Format(format!("{}: missing '{k}'", display(path)));
    CameraModel::new(
        fx.ok_or_else(|| missing("fx"))?,
        fy.ok_or_else(|| missing("fy"))?,
        cx.ok_or_else(|| missing("cx"))?,
        cy.ok_or_else(|| missing("cy"))?,
        width.ok_or_else(|| missing("width"))?,
        height.ok_or_else(|| missing("height"))?,
        extrinsic.unwrap_or_else(Pose::identity),
    )
}
