//! Polynomials and continuous-time transfer functions: roots, composition,
//! step and frequency responses, Routh tables, root loci and error constants.

mod errors;
mod freq;
mod locus;
mod poly;
mod routh;
mod tf;
mod time;

pub use errors::{error_constants, ss_error_vs_gain, ErrorConstants, ErrorKind, GainSweep};
pub use freq::{
    default_grid, frequency_response, log_grid, stability_margins, FrequencyResponse, Margins,
};
pub use locus::{root_locus, LocusPoint};
pub use poly::Polynomial;
pub use routh::{routh_table, RouthResult, Verdict};
pub use tf::{tf_feedback, TransferFunction};
pub use time::{
    default_dt, step_metrics, step_response, step_response_auto, suggest_t_end, StepMetrics,
    StepTrace,
};

pub use num_complex::Complex64;

/// Roots of a polynomial of degree ≥ 1, with multiplicity.
pub fn poly_roots(p: &Polynomial) -> crate::Result<Vec<Complex64>> {
    p.roots()
}
