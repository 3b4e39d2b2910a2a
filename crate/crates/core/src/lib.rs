//! Free elastic flow of closed plane curves and its length-preserving
//! rescaling: spectral geometry, time stepping, spectral constants of the
//! linearised problem, identity checks and decay-rate experiments.

// NaN must fail the positivity guards, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod flow;
pub mod gap;
pub mod geometry;
pub mod spectral;
pub mod support;
pub mod verify;

pub use curve::{perturbed_omega_circle, support_curve, ClosedCurve, Scenario, SupportHarmonic};
pub use error::{Error, Result};
pub use fit::{fit_decay_rate, DecayFit, FitOutcome};
pub use flow::{FlowConfig, FlowMode, FlowState, Scheme, StepSize, TimeSeries, TimeSeriesRecord};
pub use gap::{coercivity_form, lattice_gap, p_poly, SpectralReport};
pub use geometry::{compute_geometry, turning_number, GeometricData};
pub use support::{distance_to_omega_circle, support_decomposition, SupportDecomposition};
