//! Prior-free prediction of future observables.
//!
//! The pipeline: a model-specific marginal association ([`assoc`]) yields a
//! Monte Carlo sampler for the predictive distribution `G_Y`; [`plaus`] turns
//! its draws into plausibility curves and prediction regions through the
//! predictive random sets of [`prs`]; [`validity`] checks calibration by
//! simulation.

pub mod assoc;
pub mod data;
pub mod dist;
pub mod error;
pub mod gamma_solver;
pub mod plaus;
pub mod prs;
pub mod rng;
pub mod special;
pub mod validity;

pub use assoc::{MarginalSampler, ModelKind, PredictionTarget, SampleData, SufficientStats};
pub use error::{Error, Result};
pub use gamma_solver::{GammaSolveConfig, SolveMethod};
pub use plaus::{EmpiricalG, PlausibilityCurve, PredictionRegion};
pub use prs::{AssertionKind, PredictiveRandomSet};
pub use rng::UniformStream;
