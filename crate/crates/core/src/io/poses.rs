use std::fmt::Write as _;
use std::path::Path;

use super::{display, parse_real, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::scalar::Real;

/// Largest rotation drift that is silently re-orthonormalized.
pub const POSE_DRIFT_TOLERANCE: f64 = 1e-3;

/// One pose per line: the 3×4 matrix `[R | t]` in row-major order.
pub fn write_poses<T: Real>(path: &Path, poses: &[Pose<T>]) -> Result<()> {
    let mut out = String::new();
    for p in poses {
        let row: Vec<String> = p.to_rows().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    write_atomic(path, out.as_bytes())
}

/// Blank lines and lines starting with `#` are skipped.
pub fn read_poses<T: Real>(path: &Path) -> Result<Vec<Pose<T>>> {
    let text = read_text(path)?;
    let mut poses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 12 {
            return Err(Error::parse(display(path), no, format!("expected 12 numbers, found {}", tokens.len())));
        }
        let mut v = [T::zero(); 12];
        for (slot, t) in v.iter_mut().zip(&tokens) {
            *slot = parse_real(t, path, no)?;
        }
        let pose = Pose::from_rows(&v, T::lit(POSE_DRIFT_TOLERANCE))
            .map_err(|e| Error::parse(display(path), no, e.to_string()))?;
        poses.push(pose);
    }
    Ok(poses)
}
