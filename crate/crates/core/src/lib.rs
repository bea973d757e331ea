//! Leave-p-out cross-validation for projection density estimators on [0, 1].
//!
//! The Lpo risk of a projection estimator has a closed form in the sums
//! S_λ and Q_λ of the basis functions over the sample, so it costs one pass
//! instead of C(n, p) refits. Around it the crate provides the exact moments
//! of that risk estimator under a known density, its penalty view, model
//! selection over standard collections and a simulation harness.

pub mod bases;
pub mod density;
pub mod error;
pub mod estimator;
pub mod lpo;
pub mod moments;
pub mod numeric;
pub mod penalty;
pub mod selection;
pub mod simulation;
pub mod verify;

pub use bases::{
    make_haar_model, make_histogram_model, make_piecewise_poly_model, make_trig_model, HaarKind,
    Model,
};
pub use density::{sample_density, DensitySpec};
pub use error::{Error, Result};
pub use estimator::{fit_projection, Sample};
pub use lpo::{lpo_risk_brute, lpo_risk_closed, LpoRisk};
