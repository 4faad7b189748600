use crate::error::{Error, Result};
use crate::geometry::DepthImage;
use crate::scalar::Real;

/// Standard monocular depth error measures over pixels valid in both images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMetrics<T> {
    pub abs_rel: T,
    pub sq_rel: T,
    pub rmse: T,
    pub delta_1: T,
    pub delta_2: T,
    pub delta_3: T,
}

pub fn depth_metrics<T: Real>(pred: &DepthImage<T>, gt: &DepthImage<T>) -> Result<DepthMetrics<T>> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::InvalidArgument(format!(
            "prediction is {}x{} but ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let (mut abs_rel, mut sq_rel, mut sq) = (T::zero(), T::zero(), T::zero());
    let mut within = [0usize; 3];
    let mut n = 0usize;
    let base = T::lit(1.25);
    let thresholds = [base, base * base, base * base * base];
    for (&d, &g) in pred.data().iter().zip(gt.data()) {
        if !(d > T::zero() && g > T::zero()) {
            continue;
        }
        n += 1;
        let diff = d - g;
        abs_rel += diff.abs() / g;
        sq_rel += diff * diff / g;
        sq += diff * diff;
        let ratio = (d / g).max(g / d);
        for (count, t) in within.iter_mut().zip(&thresholds) {
            if ratio < *t {
                *count += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::Empty("no pixel is valid in both depth images"));
    }
    let nf = T::from_usize_lossy(n);
    let frac = |c: usize| T::from_usize_lossy(c) / nf;
    Ok(DepthMetrics {
        abs_rel: abs_rel / nf,
        sq_rel: sq_rel / nf,
        rmse: (sq / nf).sqrt(),
        delta_1: frac(within[0]),
        delta_2: frac(within[1]),
        delta_3: frac(within[2]),
    })
}
