//! Modelling and analysis toolkit for a solar-powered, sun-tracking
//! irrigation system: LTI control analysis, a double-diode PV model, solar
//! geometry, MPPT laws, LDR tracking, plant transfer functions and a
//! whole-system scenario simulator.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_out;
pub mod error;
pub mod geometry;
pub mod lti;
pub mod mppt;
pub mod plants;
pub mod pv;
pub mod report;
pub mod sim;
pub mod tracking;

pub use error::{Error, Result};

/// Guide chapters, compiled so their snippets stay in step with the code.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lti.md")]
    mod lti {}
    #[doc = include_str!("../../../book/src/pv.md")]
    mod pv {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/mppt.md")]
    mod mppt {}
    #[doc = include_str!("../../../book/src/tracking.md")]
    mod tracking {}
    #[doc = include_str!("../../../book/src/plants.md")]
    mod plants {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
