//! Maximum-likelihood inference for exponentially distributed lifespans
//! observed in a double-truncated, interval-censored sample.
//!
//! Units are born uniformly over a cohort span of `G` years and followed
//! during a study of `s` years at the end of that span. Only units alive
//! during the study are seen; those still alive at its end are censored,
//! and those born before it have their age at entry recorded instead of
//! their full lifespan. A sample reduces to three sufficient statistics,
//! and the rate estimate maximizes a smooth one-dimensional criterion.
//!
//! ```
//! use trunclife::{estimator, model::StudyWindow, ObservedRecord};
//!
//! let w = StudyWindow::new(2.0, 10.0).unwrap();
//! let records = vec![
//!     ObservedRecord::new(0.7, false, false, 3.0),
//!     ObservedRecord::new(1.5, true, false, 5.0),
//!     ObservedRecord::new(1.2, false, true, 4.0),
//! ];
//! let stats = estimator::summarize(&records, &w).unwrap();
//! let fit = estimator::fit_mle(&stats, &w, &Default::default()).unwrap();
//! assert!(fit.theta_hat > 0.0 && fit.se > 0.0);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataio;
pub mod enterprise;
pub mod error;
pub mod estimator;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod simulator;

pub use error::{Error, Result};
pub use estimator::{fit_mle, summarize, FitConfig, FitResult, ObservedRecord, SufficientStats};
pub use model::{Cell, ObservedTriple, ParamDomain, StudyWindow};
pub use simulator::{mc_study, simulate_sample, SimConfig, StudyReport};
