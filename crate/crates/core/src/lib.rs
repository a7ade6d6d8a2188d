//! Adaptive fuzzy sliding mode control for plants driven through an unknown,
//! non-symmetric dead-zone.
//!
//! - [`deadzone`] models the actuator nonlinearity.
//! - [`sliding`] defines the surface and the switching laws.
//! - [`fuzzy`] holds the adaptive compensator.
//! - [`controller`] combines them into the control law.
//! - [`plant`] provides the truth models.
//! - [`sim`] runs closed loops and checks them.
//! - [`scenario`] loads and runs complete configurations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod deadzone;
pub mod error;
pub mod fuzzy;
pub mod plant;
pub mod scenario;
pub mod sim;
pub mod sliding;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dead-zone.md")]
    mod dead_zone {}
    #[doc = include_str!("../../../book/src/sliding-surface.md")]
    mod sliding_surface {}
    #[doc = include_str!("../../../book/src/fuzzy.md")]
    mod fuzzy {}
    #[doc = include_str!("../../../book/src/controller.md")]
    mod controller {}
    #[doc = include_str!("../../../book/src/hydraulic-plant.md")]
    mod hydraulic_plant {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/boundary-layer.md")]
    mod boundary_layer {}
    #[doc = include_str!("../../../book/src/scenarios-cli.md")]
    mod scenarios_cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
