use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSolid<T> {
    pub center: Vec3<T>,
    pub size: Vec3<T>,
}

impl<T: Real> BoxSolid<T> {
    /// Box of the given footprint and height resting on the ground.
    pub fn on_ground(x: T, y: T, sx: T, sy: T, height: T) -> Self {
        Self {
            center: Vec3::new(x, y, height * T::lit(0.5)),
            size: Vec3::new(sx, sy, height),
        }
    }

    fn min(&self) -> Vec3<T> {
        self.center - self.size.scale(T::lit(0.5))
    }

    fn max(&self) -> Vec3<T> {
        self.center + self.size.scale(T::lit(0.5))
    }

    fn intersect(&self, o: &Vec3<T>, d: &Vec3<T>) -> Option<T> {
        let (lo, hi) = (self.min(), self.max());
        let mut t_near = T::neg_infinity();
        let mut t_far = T::infinity();
        for (oa, da, la, ha) in [(o.x, d.x, lo.x, hi.x), (o.y, d.y, lo.y, hi.y), (o.z, d.z, lo.z, hi.z)] {
            if da == T::zero() {
                if oa < la || oa > ha {
                    return None;
                }
                continue;
            }
            let (mut t0, mut t1) = ((la - oa) / da, (ha - oa) / da);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_near = t_near.max(t0);
            t_far = t_far.min(t1);
        }
        (t_near <= t_far && t_near > T::zero()).then_some(t_near)
    }

    fn surface_distance(&self, p: &Vec3<T>) -> T {
        let (lo, hi) = (self.min(), self.max());
        let outside = Vec3::new(
            (lo.x - p.x).max(p.x - hi.x).max(T::zero()),
            (lo.y - p.y).max(p.y - hi.y).max(T::zero()),
            (lo.z - p.z).max(p.z - hi.z).max(T::zero()),
        );
        let out = outside.norm();
        if out > T::zero() {
            return out;
        }
        (p.x - lo.x)
            .min(hi.x - p.x)
            .min(p.y - lo.y)
            .min(hi.y - p.y)
            .min(p.z - lo.z)
            .min(hi.z - p.z)
    }
}

/// Zero-thickness vertical wall standing on the ground along segment `a → b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall<T> {
    pub a: (T, T),
    pub b: (T, T),
    pub height: T,
}

impl<T: Real> Wall<T> {
    fn intersect(&self, o: &Vec3<T>, d: &Vec3<T>) -> Option<T> {
        let (ex, ey) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        // normal in xy
        let (nx, ny) = (-ey, ex);
        let denom = nx * d.x + ny * d.y;
        if denom.abs() < T::epsilon() {
            return None;
        }
        let t = (nx * (self.a.0 - o.x) + ny * (self.a.1 - o.y)) / denom;
        if !(t > T::zero()) {
            return None;
        }
        let (hx, hy, hz) = (o.x + d.x * t, o.y + d.y * t, o.z + d.z * t);
        let s = ((hx - self.a.0) * ex + (hy - self.a.1) * ey) / (ex * ex + ey * ey);
        (s >= T::zero() && s <= T::one() && hz >= T::zero() && hz <= self.height).then_some(t)
    }

    fn surface_distance(&self, p: &Vec3<T>) -> T {
        let (ex, ey) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let s = (((p.x - self.a.0) * ex + (p.y - self.a.1) * ey) / (ex * ex + ey * ey))
            .max(T::zero())
            .min(T::one());
        let (cx, cy) = (self.a.0 + ex * s, self.a.1 + ey * s);
        let cz = p.z.max(T::zero()).min(self.height);
        Vec3::new(p.x - cx, p.y - cy, p.z - cz).norm()
    }
}

/// Static scene: ground plane `z = 0` over `[-extent, extent]²`, boxes and walls.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<T> {
    pub extent: T,
    pub boxes: Vec<BoxSolid<T>>,
    pub walls: Vec<Wall<T>>,
}

impl<T: Real> SceneSpec<T> {
    pub fn new(extent: T, boxes: Vec<BoxSolid<T>>, walls: Vec<Wall<T>>) -> Result<Self> {
        if !(extent > T::zero()) {
            return Err(Error::InvalidArgument("scene extent must be positive".into()));
        }
        let inside = |x: T, y: T| x.abs() <= extent && y.abs() <= extent;
        for (i, b) in boxes.iter().enumerate() {
            if !(b.size.x > T::zero() && b.size.y > T::zero() && b.size.z > T::zero()) {
                return Err(Error::InvalidArgument(format!("box {i} has a non-positive size")));
            }
            let (lo, hi) = (b.min(), b.max());
            if !inside(lo.x, lo.y) || !inside(hi.x, hi.y) || lo.z < T::zero() {
                return Err(Error::InvalidArgument(format!("box {i} leaves the scene extent")));
            }
        }
        for (i, w) in walls.iter().enumerate() {
            if !inside(w.a.0, w.a.1) || !inside(w.b.0, w.b.1) || !(w.height > T::zero()) || w.a == w.b {
                return Err(Error::InvalidArgument(format!("wall {i} is degenerate or out of extent")));
            }
        }
        Ok(Self { extent, boxes, walls })
    }

    /// Ground only.
    pub fn empty(extent: T) -> Self {
        Self {
            extent,
            boxes: Vec::new(),
            walls: Vec::new(),
        }
    }

    /// Smallest positive ray parameter `t` at which `o + t·d` hits a surface.
    pub fn raycast(&self, o: &Vec3<T>, d: &Vec3<T>, include_ground: bool) -> Option<T> {
        let mut best: Option<T> = None;
        let mut take = |t: Option<T>| {
            if let Some(t) = t {
                if best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            }
        };
        if include_ground && d.z < T::zero() && o.z > T::zero() {
            let t = -o.z / d.z;
            let (x, y) = (o.x + d.x * t, o.y + d.y * t);
            if x.abs() <= self.extent && y.abs() <= self.extent {
                take(Some(t));
            }
        }
        for b in &self.boxes {
            take(b.intersect(o, d));
        }
        for w in &self.walls {
            take(w.intersect(o, d));
        }
        best
    }

    /// Distance from `p` to the nearest scene surface.
    pub fn surface_distance(&self, p: &Vec3<T>) -> T {
        let dx = (p.x.abs() - self.extent).max(T::zero());
        let dy = (p.y.abs() - self.extent).max(T::zero());
        let mut best = Vec3::new(dx, dy, p.z).norm();
        for b in &self.boxes {
            best = best.min(b.surface_distance(p));
        }
        for w in &self.walls {
            best = best.min(w.surface_distance(p));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_hit() {
        let s = SceneSpec::<f64>::empty(10.0);
        let t = s.raycast(&Vec3::new(0.0, 0.0, 2.0), &Vec3::new(1.0, 0.0, -1.0), true).unwrap();
        assert_eq!(t, 2.0);
        assert!(s.raycast(&Vec3::new(0.0, 0.0, 2.0), &Vec3::new(1.0, 0.0, 0.1), true).is_none());
        // beyond the ground extent
        assert!(s.raycast(&Vec3::new(0.0, 0.0, 2.0), &Vec3::new(10.0, 0.0, -1.0), true).is_none());
    }

    #[test]
    fn box_and_wall_hits() {
        let b = BoxSolid::on_ground(5.0, 0.0, 2.0, 2.0, 2.0);
        let w = Wall { a: (8.0, -5.0), b: (8.0, 5.0), height: 3.0 };
        let s: SceneSpec<f64> = SceneSpec::new(10.0, vec![b], vec![w]).unwrap();
        let o = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(s.raycast(&o, &Vec3::new(1.0, 0.0, 0.0), false), Some(4.0));
        assert_eq!(s.raycast(&o, &Vec3::new(1.0, 0.3, 0.0), false), Some(8.0));
        assert!(s.surface_distance(&Vec3::new(4.0, 0.5, 1.0)) < 1e-12);
        assert!(s.surface_distance(&Vec3::new(8.0, 1.0, 2.0)) < 1e-12);
        assert!((s.surface_distance(&Vec3::new(0.0, 0.0, 1.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let b = BoxSolid::on_ground(9.5, 0.0, 2.0, 2.0, 2.0);
        assert!(SceneSpec::new(10.0, vec![b], vec![]).is_err());
        let b = BoxSolid::on_ground(0.0, 0.0, 0.0, 2.0, 2.0);
        assert!(SceneSpec::new(10.0, vec![b], vec![]).is_err());
    }
}
