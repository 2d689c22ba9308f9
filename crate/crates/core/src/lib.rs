//! q-calculus numerics: q-special functions evaluated from their series and
//! product forms, exact higher-order q-derivatives of black-box functions,
//! discrete measures with q-Laplace transforms, and finite-order numerical
//! certification of q-complete monotonicity, q-log-complete monotonicity
//! and the q-Bernstein property.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod format;
pub mod qcore;
pub mod qdiff;
pub mod qmeasure;
pub mod qspecial;
pub mod registry;
pub mod sum;

pub use certify::{certify, CertReport, CertSpec, Grid, HarnessReport, Property, Spacing, Verdict};
pub use error::{QError, Result};
pub use qcore::{QExpKind, QParam, Regime, SeriesControl};
pub use qdiff::{QDiffTable, RealFunction};
pub use qmeasure::{DiscreteMeasure, KernelKind};
pub use qspecial::{GammaParams, RatioParams};
