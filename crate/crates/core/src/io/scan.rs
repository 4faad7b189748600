use std::fmt::Write as _;
use std::path::Path;

use super::{display, parse_real, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::laser::LaserScan2D;
use crate::scalar::Real;

const HEADER_KEY: &str = "mount_height=";

/// Writes `mount_height=<h>` followed by one `x,y,z` line per point.
pub fn write_scan<T: Real>(path: &Path, scan: &LaserScan2D<T>) -> Result<()> {
    let mut out = format!("{HEADER_KEY}{}\n", scan.mount_height());
    for p in scan.points() {
        let _ = writeln!(out, "{},{},{}", p.x, p.y, p.z);
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_scan<T: Real>(path: &Path) -> Result<LaserScan2D<T>> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = match lines.next() {
        Some((_, l)) if l.starts_with(HEADER_KEY) => &l[HEADER_KEY.len()..],
        Some(_) => return Err(Error::parse(display(path), 1, "missing 'mount_height=' header")),
        None => return Err(Error::parse(display(path), 1, "empty scan file")),
    };
    let mount_height: T = parse_real(header, path, 1)?;
    let mut points = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(display(path), no, format!("expected 3 fields, found {}", fields.len())));
        }
        points.push(Vec3::new(
            parse_real(fields[0], path, no)?,
            parse_real(fields[1], path, no)?,
            parse_real(fields[2], path, no)?,
        ));
    }
    LaserScan2D::new(points, mount_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::laser::scan_from_polar;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let angles: Vec<f64> = (0..64).map(|i| -1.5 + 0.047 * i as f64).collect();
        let ranges: Vec<f64> = (0..64).map(|i| 2.0 + (i as f64).sin().abs() * 7.0).collect();
        let pose = Pose::from_yaw(0.4, crate::geometry::Vec3::new(1.0, -2.0, 0.0));
        let scan = scan_from_polar(&angles, &ranges, 1.2, &pose).unwrap();
        write_scan(&path, &scan).unwrap();
        assert_eq!(read_scan::<f64>(&path).unwrap(), scan);
    }

    #[test]
    fn errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "").unwrap();
        assert!(read_scan::<f64>(&path).is_err());
        std::fs::write(&path, "1,2,1.2\n").unwrap();
        assert!(read_scan::<f64>(&path).is_err());
        std::fs::write(&path, "mount_height=1.2\n1,2,1.2\n1,x,1.2\n").unwrap();
        match read_scan::<f64>(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }
}
