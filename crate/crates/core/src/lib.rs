pub mod audit;
pub mod bessel;
pub mod cli;
pub mod error;
pub mod error_bounds;
pub mod inverse;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod numeric;
pub mod sampling;
pub mod spec;
pub mod synthesis;

pub use error::{Error, ErrorKind, Result};
pub use kernel::{cauchy_schwarz_audit, gram, psd_check, GramMatrix, Kernel, KernelProvenance, PsdReport};
pub use measure::{ParamMeasure, Provenance};
pub use num_complex::Complex64;
