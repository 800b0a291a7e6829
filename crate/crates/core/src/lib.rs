//! Elastic scalar-on-function regression.
//!
//! Predictors are real functions on `[0, 1]` observed under nuisance time
//! warping. The elastic model replaces the L² inner product of the classical
//! functional linear model with its supremum over norm-preserving warpings,
//! `y = h(sup_γ ⟨β, (f ∘ γ)√γ̇⟩) + ε`, which makes the response invariant to
//! the phase of the predictor.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to
//! record wall-clock timings in evaluation reports.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod basis;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod models;
pub mod optim;
pub mod sim;
pub mod warp;

pub use error::{Error, Result};
pub use grid::{derivative, inner_product, l2_norm, resample, DiscretizedFunction, Grid};
pub use warp::{
    area_action, compose, dp_align, identity_warping, invert, mean_warping, norm_action,
    phase_distance, srvf, value_action, Warping,
};
