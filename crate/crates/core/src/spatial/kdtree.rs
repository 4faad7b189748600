use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    /// Position of the point in the slice the index was built from.
    pub index: usize,
    pub distance: T,
}

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

/// Exact k-d tree over `D`-dimensional points.
#[derive(Debug, Clone)]
pub struct KdTree<T, const D: usize> {
    points: Vec<[T; D]>,
    /// Permutation of point indices; leaves reference contiguous ranges.
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

/// Max-heap entry ordered by `(squared distance, index)`.
#[derive(Clone, Copy)]
struct Candidate<T> {
    dist2: T,
    index: usize,
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Real> Eq for Candidate<T> {}
impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Candidate<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.dist2
            .partial_cmp(&o.dist2)
            .unwrap_or(Ordering::Equal)
            .then(self.index.cmp(&o.index))
    }
}

#[inline]
fn dist2<T: Real, const D: usize>(a: &[T; D], b: &[T; D]) -> T {
    let mut acc = T::zero();
    for i in 0..D {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

impl<T: Real, const D: usize> KdTree<T, D> {
    pub fn new(points: Vec<[T; D]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("cannot index an empty point set"));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("indexed point".into()));
        }
        let mut tree = Self {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        let n = tree.points.len();
        tree.build(0, n);
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[T; D] {
        &self.points[index]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the axis of largest spread
        let mut lo = [T::infinity(); D];
        let mut hi = [T::neg_infinity(); D];
        for &i in &self.order[start..end] {
            for a in 0..D {
                lo[a] = lo[a].min(self.points[i][a]);
                hi[a] = hi[a].max(self.points[i][a]);
            }
        }
        let axis = (0..D)
            .max_by(|&a, &b| {
                (hi[a] - lo[a])
                    .partial_cmp(&(hi[b] - lo[b]))
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap_or(0);
        if hi[axis] == lo[axis] {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis]
                .partial_cmp(&points[b][axis])
                .unwrap_or(Ordering::Equal)
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points to `query`, sorted by ascending distance with
    /// ties broken by lower point index. Returns every point when `k` exceeds
    /// the population.
    pub fn knn(&self, query: &[T; D], k: usize) -> Vec<Neighbor<T>> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        let mut out: Vec<Candidate<T>> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.dist2.sqrt(),
            })
            .collect()
    }

    /// Single nearest neighbor.
    pub fn nearest(&self, query: &[T; D]) -> Neighbor<T> {
        self.knn(query, 1)[0]
    }

    fn search(&self, node: usize, q: &[T; D], k: usize, heap: &mut BinaryHeap<Candidate<T>>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist2: dist2(&self.points[i], q),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if heap.peek().is_some_and(|worst| c < *worst) {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, k, heap);
                // Equality must still be explored: an equidistant point with a
                // lower index beats the current worst.
                let must_visit = heap.len() < k || heap.peek().is_some_and(|w| diff * diff <= w.dist2);
                if must_visit {
                    self.search(far, q, k, heap);
                }
            }
        }
    }
}

/// Exact index over either the xy projection or the full 3D coordinates of points.
#[derive(Debug, Clone)]
pub enum KdIndex<T> {
    Planar(KdTree<T, 2>),
    Spatial(KdTree<T, 3>),
}

impl<T: Real> KdIndex<T> {
    /// Builds an index of the given dimension (2 ignores z).
    pub fn build(points: &[Vec3<T>], dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::Planar(KdTree::new(
                points.iter().map(|p| [p.x, p.y]).collect(),
            )?)),
            3 => Ok(Self::Spatial(KdTree::new(
                points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            )?)),
            other => Err(Error::InvalidArgument(format!(
                "index dimension must be 2 or 3, got {other}"
            ))),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Planar(_) => 2,
            Self::Spatial(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Planar(t) => t.len(),
            Self::Spatial(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Indexed point as a `Vec3` (z = 0 for planar indices).
    pub fn point(&self, index: usize) -> Vec3<T> {
        match self {
            Self::Planar(t) => {
                let p = t.point(index);
                Vec3::new(p[0], p[1], T::zero())
            }
            Self::Spatial(t) => {
                let p = t.point(index);
                Vec3::new(p[0], p[1], p[2])
            }
        }
    }

    pub fn knn(&self, query: &Vec3<T>, k: usize) -> Vec<Neighbor<T>> {
        match self {
            Self::Planar(t) => t.knn(&[query.x, query.y], k),
            Self::Spatial(t) => t.knn(&[query.x, query.y, query.z], k),
        }
    }

    pub fn nearest(&self, query: &Vec3<T>) -> Neighbor<T> {
        self.knn(query, 1)[0]
    }
}

pub fn build_index<T: Real>(points: &[Vec3<T>], dim: usize) -> Result<KdIndex<T>> {
    KdIndex::build(points, dim)
}

pub fn knn<T: Real>(index: &KdIndex<T>, query: &Vec3<T>, k: usize) -> Vec<Neighbor<T>> {
    index.knn(query, k)
}
