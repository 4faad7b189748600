use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::laser::LaserScan2D;
use crate::local_map::LocalMap;
use crate::scalar::Real;
use crate::spatial::{ConfidenceGrid, KdIndex};

use super::mlp::{Mlp, MlpGrads, Trace};
use super::model::{CloudFeatures, RefinementModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Adam => "adam",
            Self::Sgd => "sgd",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(Self::Adam),
            "sgd" => Ok(Self::Sgd),
            other => Err(Error::InvalidArgument(format!("unknown optimizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub learning_rate: T,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub beta1: T,
    pub beta2: T,
    /// Global gradient norm limit across both heads.
    pub clip_norm: Option<T>,
    pub offset_clamp: T,
    /// Seeded subsample of each training cloud; `None` trains on every point.
    pub max_points_per_sample: Option<usize>,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(1e-3),
            epochs: 200,
            batch_size: 256,
            seed: 0,
            optimizer: OptimizerKind::Adam,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            clip_norm: Some(T::lit(10.0)),
            offset_clamp: T::lit(2.0),
            max_points_per_sample: Some(2000),
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.learning_rate >= T::zero()) || !self.learning_rate.is_finite() {
            return bad("learning rate must be finite and non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        let unit = |b: T| b >= T::zero() && b < T::one();
        if !unit(self.beta1) || !unit(self.beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.clip_norm.is_some_and(|c| !(c > T::zero())) {
            return bad("gradient clip norm must be positive");
        }
        if !(self.offset_clamp >= T::zero()) {
            return bad("offset clamp must be non-negative");
        }
        if self.max_points_per_sample == Some(0) {
            return bad("max points per sample must be at least 1");
        }
        Ok(())
    }
}

/// One training frame: preliminary cloud, its scan, confidence grid and supervising map.
#[derive(Debug, Clone)]
pub struct TrainingSample<T> {
    pub cloud: PointCloud<T>,
    pub scan: LaserScan2D<T>,
    pub grid: ConfidenceGrid<T>,
    pub map: LocalMap<T>,
}

#[derive(Debug, Clone)]
struct AdamState<T> {
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> AdamState<T> {
    fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }
}

fn update<T: Real>(
    mlp: &mut Mlp<T>,
    grads: &MlpGrads<T>,
    state: &mut AdamState<T>,
    cfg: &TrainConfig<T>,
    step: i32,
) {
    let lr = cfg.learning_rate;
    match cfg.optimizer {
        OptimizerKind::Sgd => {
            for (p, g) in mlp.parameters_mut().zip(grads.values()) {
                *p -= lr * *g;
            }
        }
        OptimizerKind::Adam => {
            let eps = T::lit(1e-8);
            let (b1, b2) = (cfg.beta1, cfg.beta2);
            let c1 = T::one() - b1.powi(step);
            let c2 = T::one() - b2.powi(step);
            let params = mlp.parameters_mut().zip(grads.values());
            for ((p, g), (m, v)) in params.zip(state.m.iter_mut().zip(state.v.iter_mut())) {
                *m = b1 * *m + (T::one() - b1) * *g;
                *v = b2 * *v + (T::one() - b2) * *g * *g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

struct Prepared<T> {
    base: Vec<Vec3<T>>,
    features: CloudFeatures<T>,
    map_index: KdIndex<T>,
}

fn prepare<T: Real>(
    sample: &TrainingSample<T>,
    model: &RefinementModel<T>,
    max_points: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Prepared<T>> {
    if sample.cloud.is_empty() {
        return Err(Error::Empty("training cloud is empty"));
    }
    if sample.map.cloud().is_empty() {
        return Err(Error::Empty("local map is empty"));
    }
    let n = sample.cloud.len();
    let mut indices: Vec<usize> = match max_points {
        Some(m) if m < n => rand::seq::index::sample(rng, n, m).into_vec(),
        _ => (0..n).collect(),
    };
    indices.sort_unstable();
    let features = CloudFeatures::extract_subset(
        &sample.cloud,
        &sample.scan,
        &sample.grid,
        model.k,
        model.reject_radius,
        indices.iter().copied(),
    )?;
    Ok(Prepared {
        base: indices.iter().map(|&i| sample.cloud.points()[i]).collect(),
        features,
        map_index: KdIndex::build(sample.map.cloud().points(), 3)?,
    })
}

/// Trains both heads against the argmin correspondences to each sample's local map.
///
/// Each optimizer step applies the current model to a minibatch, recomputes
/// nearest-map-point correspondences, holds them fixed and backpropagates the
/// mean squared residual. Returns the trained model and the mean per-point
/// loss of every epoch.
pub fn train_refinement<T: Real>(
    model: &RefinementModel<T>,
    samples: &[TrainingSample<T>],
    cfg: &TrainConfig<T>,
) -> Result<(RefinementModel<T>, Vec<T>)> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("no training samples"));
    }
    let mut model = model.clone();
    model.offset_clamp = cfg.offset_clamp;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let prepared = samples
        .iter()
        .map(|s| prepare(s, &model, cfg.max_points_per_sample, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut entries: Vec<(usize, usize)> = prepared
        .iter()
        .enumerate()
        .flat_map(|(s, p)| (0..p.base.len()).map(move |i| (s, i)))
        .collect();
    let total = entries.len();

    let mut grads_xy = MlpGrads::zeros_like(&model.mlp_xy);
    let mut grads_z = MlpGrads::zeros_like(&model.mlp_z);
    let mut adam_xy = AdamState::new(model.mlp_xy.parameter_count());
    let mut adam_z = AdamState::new(model.mlp_z.parameter_count());
    let (mut trace_xy, mut trace_z) = (Trace::default(), Trace::default());
    let two = T::lit(2.0);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step = 0i32;

    for epoch in 0..cfg.epochs {
        entries.shuffle(&mut rng);
        let mut epoch_loss = T::zero();
        for batch in entries.chunks(cfg.batch_size) {
            grads_xy.clear();
            grads_z.clear();
            let inv = T::one() / T::from_usize_lossy(batch.len());
            let mut batch_loss = T::zero();
            for &(s, i) in batch {
                let prep = &prepared[s];
                let p = prep.base[i];
                model.mlp_xy.forward_trace(prep.features.fxy(i), &mut trace_xy)?;
                model.mlp_z.forward_trace(prep.features.fz(i), &mut trace_z)?;
                let (ox, oy) = (trace_xy.output()[0], trace_xy.output()[1]);
                let oz = trace_z.output()[0];
                let q = Vec3::new(
                    p.x + model.clamp(ox),
                    p.y + model.clamp(oy),
                    p.z + model.clamp(oz),
                );
                let nn = prep.map_index.nearest(&q);
                let target = prep.map_index.point(nn.index);
                let r = q - target;
                batch_loss += r.norm_squared();
                let pass = |o: T| {
                    if o.abs() < model.offset_clamp {
                        T::one()
                    } else {
                        T::zero()
                    }
                };
                let gxy = [two * r.x * pass(ox) * inv, two * r.y * pass(oy) * inv];
                let gz = [two * r.z * pass(oz) * inv];
                model.mlp_xy.backward(&trace_xy, &gxy, &mut grads_xy)?;
                model.mlp_z.backward(&trace_z, &gz, &mut grads_z)?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss diverged at epoch {epoch}, step {step}"
                )));
            }
            epoch_loss += batch_loss;
            if let Some(clip) = cfg.clip_norm {
                let norm = (grads_xy.norm_squared() + grads_z.norm_squared()).sqrt();
                if norm > clip {
                    let s = clip / norm;
                    grads_xy.scale(s);
                    grads_z.scale(s);
                }
            }
            step += 1;
            update(&mut model.mlp_xy, &grads_xy, &mut adam_xy, cfg, step);
            update(&mut model.mlp_z, &grads_z, &mut adam_z, cfg, step);
        }
        let mean = epoch_loss / T::from_usize_lossy(total);
        if !mean.is_finite() {
            return Err(Error::NonFinite(format!("training loss diverged at epoch {epoch}")));
        }
        history.push(mean);
    }
    Ok((model, history))
}
