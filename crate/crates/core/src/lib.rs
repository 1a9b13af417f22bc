//! Primary-market AMM (P-AMM) for stablecoin redemption.
//!
//! The crate evaluates the three-piece redemption curve (flat at 1, linear
//! decay, flat at the sustainable reserve ratio), selects its dynamic
//! parameters from an anchor point, detects the curve region of a bare
//! state from precomputed thresholds and reconstructs the anchor with a
//! constant number of operations. A simplified discrete-decay curve, an
//! ODE-based oracle and path simulation with fees and minting round it out.
//!
//! Every algorithm is generic over [`Scalar`], so the same code runs in
//! binary floating point (`f64`) and in 18-digit fixed-point decimal
//! ([`Fixed18`]).
//!
//! ## Modules
//!
//! - [`numeric`]: the scalar abstraction, fixed-point decimal and op counting
//! - [`state`]: domain types and the normalization layer
//! - [`curve`]: dynamic parameters and closed-form `p`, `b`, `r`
//! - [`region`]: case taxonomy, threshold precomputation, region detection
//! - [`reconstruct`]: anchor reconstruction and end-to-end redemption quotes
//! - [`discrete`]: the discontinuous two-level curve
//! - [`dynamics`]: ODE oracle, fee/mint paths, path property checks
//! - [`io`]: JSON and CSV surfaces
//! - [`suites`]: seeded property suites used by the `fuzz` command

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod numeric;
pub mod reconstruct;
pub mod region;
pub mod state;
pub mod suites;

pub use curve::{CurvePoint, CurveShape, CurveSpec, Segment, Triviality};
pub use discrete::DiscreteSpec;
pub use dynamics::{FeeConfig, MintPrice, PathTrace, RedeemFee, TradeAction, TradeKind};
pub use error::{PammError, Result};
pub use numeric::{Counted, Fixed18, NumericMode, OpCount, Scalar};
pub use reconstruct::{Quote, QuoteRegion};
pub use region::{Case, Minor, PrecomputedThresholds, Region};
pub use state::{AnchorPoint, DynamicParams, StaticParams, SystemState};
