//! Constraint features, the two-headed MLP refinement and its training loop.

mod features;
mod mlp;
mod model;
mod train;

pub use features::{extract_fxy, extract_fz, FxyFeature, FzFeature};
pub use mlp::{mlp_backward, mlp_forward, Activation, Dense, Mlp, MlpGrads, Trace};
pub use model::{
    apply_refinement, refinement_loss, CloudFeatures, RefinementModel, DEFAULT_HIDDEN,
    DEFAULT_INIT_SCALE, DEFAULT_K, DEFAULT_LEAKY_SLOPE, DEFAULT_OFFSET_CLAMP,
    DEFAULT_REJECT_RADIUS,
};
pub use train::{train_refinement, OptimizerKind, TrainConfig, TrainingSample};
