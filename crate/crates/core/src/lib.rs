//! Minimum-energy wireless charging of shelf-label populations.
//!
//! This crate plans the downlink of a ceiling-mounted antenna array that
//! must recharge hundreds of battery-free electronic shelf labels over a
//! long window (say, every night). Two transmission strategies are
//! implemented end to end:
//!
//! * **Non-coherent**: antennas transmit independent signals; received
//!   powers add. Minimizing total transmit power is a linear program over
//!   per-antenna powers, solved by a built-in bounded-variable simplex
//!   ([`noncoherent`]).
//! * **Coherent**: antennas form beams; received amplitudes add. The
//!   semidefinite relaxation of the precoder design is solved by a
//!   built-in ADMM engine, and per-slot precoders are recovered from an
//!   eigendecomposition of the optimal Gram matrix ([`coherent`]).
//!
//! Around the optimizers sit the deployment geometry ([`scenario`]), the
//! indoor line-of-sight channel model ([`channel`]), the RF-to-DC
//! harvester model ([`harvester`]), position-based antenna subset
//! selection ([`selection`]), and evaluation/reporting machinery
//! ([`evaluation`]) that turns schedules into per-receiver energy reports
//! and antenna-count sweeps.
//!
//! All internal math is in SI units (W, J, s, m, Hz); dBm appears only at
//! I/O boundaries ([`units`]). Everything that draws randomness takes an
//! explicit seed and is reproducible bit for bit ([`seeding`]).

pub mod channel;
pub mod coherent;
pub mod error;
pub mod evaluation;
pub mod harvester;
pub mod io;
pub mod noncoherent;
pub mod scenario;
pub mod sdp;
pub mod seeding;
pub mod selection;
pub mod simplex;
pub mod units;

pub use error::{Error, Result};
