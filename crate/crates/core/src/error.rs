use thiserror::Error;

use crate::flow::FlowState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample count {0} must be even and at least 16")]
    InvalidSampleCount(usize),

    #[error("curve is not immersed: |γ_u| = {speed:e} at sample {index}")]
    NotImmersed { index: usize, speed: f64 },

    #[error("turning number is under-resolved: winding residual {residual:e} exceeds 1e-3")]
    Aliasing { residual: f64 },

    #[error("curvature is not positive at sample {index} (k = {curvature:e}); no normal-angle gauge")]
    NotConvex { index: usize, curvature: f64 },

    #[error("requested support perturbation gives non-positive radius of curvature {min_radius:e}")]
    NonConvexRequest { min_radius: f64 },

    #[error("support mode m = 0 changes the length and is not allowed")]
    LengthChangingMode,

    #[error("scan window n_max = {given} too small; need at least {required}")]
    ScanWindowTooSmall { given: i64, required: i64 },

    #[error("input must have zero mean; got mean {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("explicit step size underflow ({dt:e}) at t = {}", .snapshot.t)]
    DtUnderflow { dt: f64, snapshot: Box<FlowState> },

    #[error("cannot parse curve spec `{spec}`: {reason}")]
    CurveSpec { spec: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
