use std::fmt::Write as _;
use std::path::Path;

use super::{display, parse_real, parse_usize, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::scalar::Real;

/// Writes an ASCII PLY with `x y z` double properties.
pub fn write_ply<T: Real>(path: &Path, cloud: &PointCloud<T>) -> Result<()> {
    let mut out = String::with_capacity(64 + cloud.len() * 48);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    write_atomic(path, out.as_bytes())
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// Reads the vertex positions of an ASCII PLY. Extra vertex properties and
/// elements are skipped.
pub fn read_ply<T: Real>(path: &Path) -> Result<PointCloud<T>> {
    let text = read_text(path)?;
    let err = |line: usize, msg: String| Error::parse(display(path), line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(err(1, "missing 'ply' magic".into())),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    let mut header_end = None;
    for (no, line) in lines.by_ref() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", "ascii", "1.0"] => format_seen = true,
            ["format", other, ..] => return Err(err(no, format!("unsupported format '{other}'"))),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: parse_usize(count, path, no)?,
                properties: Vec::new(),
            }),
            ["property", "list", ..] => match elements.last_mut() {
                Some(e) if e.name != "vertex" => e.properties.push("list".into()),
                Some(_) => return Err(err(no, "list properties on vertices are not supported".into())),
                None => return Err(err(no, "property before any element".into())),
            },
            ["property", _ty, name] => match elements.last_mut() {
                Some(e) => e.properties.push(name.to_string()),
                None => return Err(err(no, "property before any element".into())),
            },
            ["end_header"] => {
                header_end = Some(no);
                break;
            }
            _ => return Err(err(no, format!("unexpected header line '{line}'"))),
        }
    }
    let header_end = header_end.ok_or_else(|| err(text.lines().count(), "missing end_header".into()))?;
    if !format_seen {
        return Err(err(header_end, "missing format line".into()));
    }
    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| err(header_end, "no vertex element".into()))?;
    let vertex = &elements[vertex_pos];
    let column = |name: &str| {
        vertex
            .properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| err(header_end, format!("vertex element lacks property '{name}'")))
    };
    let (cx, cy, cz) = (column("x")?, column("y")?, column("z")?);
    let width = vertex.properties.len();

    // Skip data lines of elements declared before the vertices.
    let skip: usize = elements[..vertex_pos].iter().map(|e| e.count).sum();
    let mut data = lines.filter(|(_, l)| !l.is_empty()).skip(skip);
    let mut points = Vec::with_capacity(vertex.count);
    for found in 0..vertex.count {
        let Some((no, line)) = data.next() else {
            return Err(err(
                text.lines().count(),
                format!("expected {} vertices, found {found}", vertex.count),
            ));
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != width {
            return Err(err(no, format!("expected {width} values, found {}", tokens.len())));
        }
        points.push(Vec3::new(
            parse_real(tokens[cx], path, no)?,
            parse_real(tokens[cy], path, no)?,
            parse_real(tokens[cz], path, no)?,
        ));
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = (0..1000)
            .map(|_| Vec3::new(rng.random_range(-50.0..50.0), rng.random::<f64>(), rng.random_range(-1e-3..1e3)))
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        write_ply(&path, &cloud).unwrap();
        assert_eq!(read_ply::<f64>(&path).unwrap(), cloud);
    }

    #[test]
    fn empty_cloud() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ply");
        write_ply(&path, &PointCloud::<f64>::empty()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("element vertex 0"));
        assert!(read_ply::<f64>(&path).unwrap().is_empty());
    }

    #[test]
    fn truncated_vertex_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n",
        )
        .unwrap();
        let msg = read_ply::<f64>(&path).unwrap_err().to_string();
        assert!(msg.contains("expected 3 vertices, found 2"), "{msg}");
    }

    #[test]
    fn malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ply");
        let cases = [
            "plx\n",
            "ply\nformat binary_little_endian 1.0\nend_header\n",
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n",
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 a 0\n",
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0\n",
        ];
        for c in cases {
            std::fs::write(&path, c).unwrap();
            assert!(read_ply::<f64>(&path).is_err(), "{c}");
        }
        std::fs::write(&path, cases[3]).unwrap();
        match read_ply::<f64>(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 8),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn extra_properties_and_elements() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float z\nproperty float x\nproperty uchar red\nproperty float y\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n3 1 255 2\n6 4 0 5\n3 0 1 1\n",
        )
        .unwrap();
        let c = read_ply::<f32>(&path).unwrap();
        assert_eq!(c.points(), &[Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    }
}
