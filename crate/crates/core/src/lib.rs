//! Deterministic laboratory for automated market makers.
//!
//! The crate implements the proactive market maker (PMM) bonding curve, its
//! multi-token generalization (MPMM), four baseline makers (CSMM, CPMM,
//! MCSMM, MCPMM), and a seed-driven scenario simulator that records
//! capital-efficiency and impermanent-loss series for every maker over
//! identical swap traffic.
//!
//! Everything in this crate is pure computation over `f64` values: no IO, no
//! clocks, no global state. File formats, timestamps, and the command-line
//! front end live in the companion `ammlab` crate. The crate builds without
//! `std` (with `alloc`); the default `std` feature only switches the float
//! intrinsics and enables the dependencies' std paths.
//!
//! ```
//! use ammlab_core::curve::{self, OracleQuote, PairCurveState, PmmParams, SwapSide};
//! use ammlab_core::recovery;
//!
//! // A fresh pool at its equilibrium anchors, unit prices, k = 0.5.
//! let params = PmmParams::new(0.5)?;
//! let prices = OracleQuote::new(1.0, 1.0)?;
//! let pool = PairCurveState::at_equilibrium(100.0, 100.0)?;
//!
//! // Swapping 20 base in pulls the quote balance down the curve.
//! let receipt = curve::swap_exact_in(&pool, &prices, &params, SwapSide::BaseIn, 20.0)?;
//! assert!(receipt.amount_out < 20.0); // costlier than the fair rate
//!
//! // After the oracle moves, recovery recomputes the depleted anchor so the
//! // balances sit exactly on the new-price curve. With the base token
//! // appreciating, the excess base recoups more quote than was deposited.
//! let moved = OracleQuote::new(1.2, 1.0)?;
//! let anchors = recovery::pmm_recover(&receipt.new_state, &moved, &params)?;
//! assert_eq!(anchors.b0_new, 100.0); // base is in excess, anchor kept
//! assert!(anchors.q0_new > 100.0);
//! # Ok::<(), ammlab_core::Error>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod curve;
pub mod error;
pub mod feed;
pub mod makers;
pub mod num;
pub mod recovery;
pub mod sim;
pub mod traffic;

pub use curve::{OracleQuote, PairCurveState, PmmParams, Regime, SwapReceipt, SwapSide};
pub use error::Error;
pub use recovery::{DepositRecord, RetargetResult};
