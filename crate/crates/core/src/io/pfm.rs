use std::path::Path;

use super::{display, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::DepthImage;
use crate::scalar::Real;

/// Writes a grayscale little-endian PFM (`Pf`, scale `-1`), rows bottom to top.
///
/// Values are stored as `f32`; `f32` images round-trip bit for bit.
pub fn write_pfm<T: Real>(path: &Path, image: &DepthImage<T>) -> Result<()> {
    let (w, h) = (image.width(), image.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in (0..h).rev() {
        for col in 0..w {
            let v = image.get(col, row).to_f32().unwrap_or(f32::NAN);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_atomic(path, &out)
}

/// Splits off one newline-terminated header line.
fn header_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    let rest = &bytes[*pos..];
    let end = rest.iter().position(|&b| b == b'\n')?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).ok().map(str::trim)
}

/// Reads a grayscale PFM of either byte order.
pub fn read_pfm<T: Real>(path: &Path) -> Result<DepthImage<T>> {
    let bytes = std::fs::read(path)?;
    let err = |line: usize, msg: &str| Error::parse(display(path), line, msg);
    let mut pos = 0;
    match header_line(&bytes, &mut pos) {
        Some("Pf") => {}
        Some("PF") => return Err(err(1, "color PFM is not supported")),
        _ => return Err(err(1, "bad magic, expected 'Pf'")),
    }
    let dims = header_line(&bytes, &mut pos).ok_or_else(|| err(2, "missing dimensions"))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(2, "dimensions must be integers")))
        .collect::<Result<_>>()?;
    let [w, h] = dims[..] else {
        return Err(err(2, "expected 'width height'"));
    };
    let scale: f64 = header_line(&bytes, &mut pos)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(3, "missing scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(err(3, "scale must be finite and non-zero"));
    }
    let little = scale < 0.0;
    let payload = &bytes[pos..];
    let expected = w * h * 4;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "{}: expected {expected} data bytes for {w}x{h}, found {}",
            display(path),
            payload.len()
        )));
    }
    let mut data = vec![T::zero(); w * h];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let raw: [u8; 4] = chunk.try_into().expect("chunk of four");
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (row, col) = (h - 1 - i / w, i % w);
        data[row * w + col] = T::from_f32(v).ok_or_else(|| Error::Format("unrepresentable value".into()))?;
    }
    DepthImage::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_image_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f32> = (0..37 * 23)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..80.0) })
            .collect();
        let img = DepthImage::new(37, 23, data).unwrap();
        write_pfm(&path, &img).unwrap();
        let back = read_pfm::<f32>(&path).unwrap();
        assert_eq!(back.width(), 37);
        let same = img.data().iter().zip(back.data()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn zero_mask_and_orientation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.pfm");
        let img = DepthImage::<f64>::zeros(4, 3);
        write_pfm(&path, &img).unwrap();
        assert_eq!(read_pfm::<f64>(&path).unwrap(), img);

        // first stored row is the bottom image row
        let img = DepthImage::new(1, 2, vec![1.0f32, 2.0]).unwrap();
        write_pfm(&path, &img).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        assert_eq!(&bytes[n - 8..n - 4], &2.0f32.to_le_bytes());
    }

    #[test]
    fn big_endian_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.pfm");
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&1.5f32.to_be_bytes());
        bytes.extend_from_slice(&0.25f32.to_be_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert_eq!(read_pfm::<f32>(&path).unwrap().data(), &[1.5, 0.25]);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pfm");
        std::fs::write(&path, b"P5\n1 1\n-1.0\n\0\0\0\0").unwrap();
        assert!(read_pfm::<f32>(&path).is_err());
        std::fs::write(&path, b"Pf\n2 2\n-1.0\n\0\0\0\0").unwrap();
        assert!(read_pfm::<f32>(&path).is_err());
        std::fs::write(&path, b"Pf\n2\n-1.0\n\0\0\0\0").unwrap();
        assert!(read_pfm::<f32>(&path).is_err());
    }
}
