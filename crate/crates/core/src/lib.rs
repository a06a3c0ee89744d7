//! Parity-defect norm bounds for sums of tensor-product observables, the
//! product-state thresholds they are compared against, and the resulting
//! lower bounds on trace distance to product states and on total correlation.
//!
//! Site and term indices are 0-based throughout. Site 0 is the most
//! significant tensor factor.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod observable;
pub mod pauli;
pub mod threshold;

pub use correlation::{CorrelationReport, DensityState, GammaProvenance};
pub use dynamics::{DecayParams, DecayTrace, PositivityWindow};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen, NumericPolicy};
pub use observable::{DefectReport, ObservableFamily};
pub use threshold::{ProductState, SeesawOptions, ThresholdResult};

pub use num_complex::Complex64;
