// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of spoken security-code authentication ceremonies in
//! end-to-end encrypted meetings, and of the attack that defeats them by
//! cutting and pasting the host's previously recorded digits.
//!
//! The modules build on each other roughly bottom-up:
//!
//! - [`code`]: 40-digit security codes derived from the host's identity key.
//! - [`audio`]: mono PCM clips, WAV I/O, capture channel models.
//! - [`segment`] and [`splice`]: endpointing, snippet libraries, splicing.
//! - [`cepstral`]: mel-cepstral features and distortion.
//! - [`meeting`]: the session state machine and participant verification.
//! - [`attack`]: the end-to-end attack and its mitigations.
//! - [`report`]: experiment tables and plot data.

pub mod attack;
pub mod audio;
pub mod cepstral;
pub mod code;
pub mod corpus;
pub mod error;
pub mod meeting;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod segment;
pub mod splice;

pub use error::{Error, Result};
