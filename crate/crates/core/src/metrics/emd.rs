use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::scalar::Real;

pub const DEFAULT_EMD_CAP: usize = 512;
pub const DEFAULT_SUBSAMPLE_SEED: u64 = 0x5eed;

/// Seeded uniform subsample of `n` points without replacement, original order kept.
pub fn subsample<T: Real>(cloud: &PointCloud<T>, n: usize, seed: u64) -> Vec<Vec3<T>> {
    if n >= cloud.len() {
        return cloud.points().to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, cloud.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| cloud.points()[i]).collect()
}

/// Minimum-cost perfect matching on a square row-major cost matrix.
///
/// Returns `assignment[row] = column` and the total cost. Shortest augmenting
/// paths with dual potentials, O(n³).
pub fn hungarian<T: Real>(cost: &[T], n: usize) -> (Vec<usize>, T) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n×n");
    if n == 0 {
        return (Vec::new(), T::zero());
    }
    let inf = T::infinity();
    // 1-based; column 0 is a virtual root.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_v = vec![inf; n + 1];
    let mut used = vec![false; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        min_v.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            let crow = &cost[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = crow[j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    (assignment, total)
}

fn distance_matrix<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> Vec<T> {
    let mut c = Vec::with_capacity(a.len() * b.len());
    for p in a {
        c.extend(b.iter().map(|q| p.distance(q)));
    }
    c
}

/// Exact earth mover's distance between equal-size point sets: the mean
/// Euclidean distance of the optimal bijection.
pub fn emd_between<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("earth mover's distance needs non-empty clouds"));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let n = a.len();
    let (_, total) = hungarian(&distance_matrix(a, b), n);
    Ok(total / T::from_usize_lossy(n))
}

/// Exact earth mover's distance after subsampling both clouds to
/// `min(|a|, |b|, cap)` points with the same seed.
pub fn emd_exact<T: Real>(a: &PointCloud<T>, b: &PointCloud<T>, cap: usize, seed: u64) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("earth mover's distance needs non-empty clouds"));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("subsample cap must be positive".into()));
    }
    let n = a.len().min(b.len()).min(cap);
    emd_between(&subsample(a, n, seed), &subsample(b, n, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornResult<T> {
    /// Debiased entropic transport cost, clamped at zero.
    pub cost: T,
    pub converged: bool,
    pub iterations: usize,
    /// L1 violation of the source marginal at termination.
    pub marginal_error: T,
}

fn log_sum_exp<T: Real>(values: impl Iterator<Item = T> + Clone) -> T {
    let max = values.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + values.map(|x| (x - max).exp()).sum::<T>().ln()
}

struct Entropic<T> {
    cost: T,
    converged: bool,
    iterations: usize,
    marginal_error: T,
}

/// Annealed log-domain Sinkhorn on a dense `n×m` cost matrix with uniform
/// marginals. Both potentials are updated from the previous iterate and
/// averaged with it, which keeps symmetric problems from oscillating.
fn entropic_transport<T: Real>(cost: &[T], n: usize, m: usize, epsilon: T, iterations: usize) -> Entropic<T> {
    let log_mu = -T::from_usize_lossy(n).ln();
    let log_nu = -T::from_usize_lossy(m).ln();
    let scale = cost.iter().copied().fold(T::zero(), T::max);
    let tol = T::lit(1e-6).max(T::epsilon().sqrt());
    let half = T::lit(0.5);
    let anneal = T::lit(0.7);

    let mut f = vec![T::zero(); n];
    let mut g = vec![T::zero(); m];
    let mut f_next = vec![T::zero(); n];
    let mut g_next = vec![T::zero(); m];
    let mut eps = scale.max(epsilon);

    let row_error = |f: &[T], g: &[T], eps: T| -> T {
        let mut total = T::zero();
        for (i, fi) in f.iter().enumerate() {
            let row = &cost[i * m..(i + 1) * m];
            let mass: T = row
                .iter()
                .zip(g)
                .map(|(c, gj)| ((*fi + *gj - *c) / eps + log_mu + log_nu).exp())
                .sum();
            total += (mass - log_mu.exp()).abs();
        }
        total
    };

    let mut it = 0usize;
    let mut err = T::infinity();
    let mut converged = false;
    while it < iterations {
        for (i, fi) in f_next.iter_mut().enumerate() {
            let row = &cost[i * m..(i + 1) * m];
            *fi = -eps * log_sum_exp(row.iter().zip(&g).map(|(c, gj)| (*gj - *c) / eps + log_nu));
        }
        for (j, gj) in g_next.iter_mut().enumerate() {
            *gj = -eps * log_sum_exp((0..n).map(|i| (f[i] - cost[i * m + j]) / eps + log_mu));
        }
        for (a, b) in f.iter_mut().zip(&f_next) {
            *a = half * (*a + *b);
        }
        for (a, b) in g.iter_mut().zip(&g_next) {
            *a = half * (*a + *b);
        }
        it += 1;
        if eps > epsilon {
            eps = (eps * anneal).max(epsilon);
            continue;
        }
        err = row_error(&f, &g, eps);
        if err < tol {
            converged = true;
            break;
        }
    }
    if err.is_infinite() {
        err = row_error(&f, &g, eps);
    }

    let mut total = T::zero();
    for i in 0..n {
        for j in 0..m {
            let c = cost[i * m + j];
            total += ((f[i] + g[j] - c) / eps + log_mu + log_nu).exp() * c;
        }
    }
    Entropic {
        cost: total,
        converged,
        iterations: it,
        marginal_error: err,
    }
}

/// Debiased entropic transport distance between uniform measures on `a` and
/// `b` with Euclidean ground cost.
///
/// The transport cost of the entropic plan between `a` and `b` is corrected
/// by half the self-transport costs of each cloud, so identical clouds score
/// zero. Each of the three problems anneals its temperature from the largest
/// pairwise distance down to `epsilon` and runs at most `iterations` updates.
pub fn emd_sinkhorn<T: Real>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    epsilon: T,
    iterations: usize,
) -> Result<SinkhornResult<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("transport needs non-empty clouds"));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let (n, m) = (a.len(), b.len());
    let ab = entropic_transport(&distance_matrix(a.points(), b.points()), n, m, epsilon, iterations);
    let aa = entropic_transport(&distance_matrix(a.points(), a.points()), n, n, epsilon, iterations);
    let bb = entropic_transport(&distance_matrix(b.points(), b.points()), m, m, epsilon, iterations);
    let cost = (ab.cost - T::lit(0.5) * (aa.cost + bb.cost)).max(T::zero());
    Ok(SinkhornResult {
        cost,
        converged: ab.converged && aa.converged && bb.converged,
        iterations: ab.iterations,
        marginal_error: ab.marginal_error,
    })
}
