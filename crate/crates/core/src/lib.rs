//! Worst-case state bounds for Hurwitz-stable LTI systems driven by
//! amplitude-bounded additive disturbances.
//!
//! The impulse-response channel from disturbance `j` to state `k` is split
//! into modal terms, grouped into pairs with closed-form absolute integrals,
//! and summed. A numerical oracle (matrix exponential, adaptive quadrature,
//! bang-bang disturbance synthesis and RK4 simulation) checks every result.

pub mod bounds;
pub mod error;
pub mod export;
pub mod input;
pub mod lti;
pub mod oracle;
pub mod tfc;

pub use bounds::{
    assemble_channel_bound, loose_bound, total_bound, total_bound_with, total_loose_bound, BoundOptions, BoundResult,
    Horizon, TotalBound,
};
pub use error::{Error, Result};
pub use lti::{
    build_closed_loop, check_hurwitz, eigendecompose_and_classify, evaluate_impulse_channel, modal_coefficients,
    pair_terms, ClosedLoopSystem, DisturbanceBounds, EigenClass, Eigenstructure, ModalExpansion, PairingStrategy,
};
pub use oracle::{DisturbanceProfile, SimulationTrace, VerificationReport};
pub use tfc::{Regime, SafeRegionMap, TfcParams};
