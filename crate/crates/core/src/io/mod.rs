//! Plain-text and PFM file formats.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! text format reads back bit-identical values.

mod camera;
mod model;
mod pfm;
mod ply;
mod poses;
mod scan;

use std::path::Path;

pub use camera::{read_camera, write_camera};
pub use model::{read_model, write_model, MODEL_MAGIC};
pub use pfm::{read_pfm, write_pfm};
pub use ply::{read_ply, write_ply};
pub use poses::{read_poses, write_poses, POSE_DRIFT_TOLERANCE};
pub use scan::{read_scan, write_scan};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Parses one float token; `line` is 1-based.
fn parse_real<T: Real>(token: &str, path: &Path, line: usize) -> Result<T> {
    let v: T = token
        .parse()
        .map_err(|_| Error::parse(display(path), line, format!("'{token}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(display(path), line, format!("'{token}' is not finite")));
    }
    Ok(v)
}

fn parse_usize(token: &str, path: &Path, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(display(path), line, format!("'{token}' is not a count")))
}

/// Writes via a sibling temporary file so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
