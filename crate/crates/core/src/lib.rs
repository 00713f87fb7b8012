//! Amplitude-exact simulation of exchange-free single-qubit computation.
//!
//! A photon held by Alice is steered through nested interferometers whose inner arm
//! crosses to Bob. Bob only chooses when to block his channel. Conditioned on the
//! photon surviving, it has never been to Bob, yet it carries a unitary Bob chose.

pub mod error;
pub mod gates;
pub mod interferometer;
pub mod json;
pub mod kraus;
pub mod phase_unit;
pub mod protocol;
pub mod remote_circuit;
pub mod ry_direct;
pub mod state;

pub use error::{Error, Result};
pub use gates::{Op2, C64};
pub use interferometer::{BlockPolicy, BlockSchedule, CycleConfig, LossLedger};
pub use phase_unit::{PhaseUnitConfig, PhaseUnitResult, UnitMode};
pub use protocol::{BobProgram, ProtocolResult};
pub use state::{bob_tag_weight, PolState};
