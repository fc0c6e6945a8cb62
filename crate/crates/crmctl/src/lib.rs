//! Library side of the `crmctl` binary: configuration, grid evaluation,
//! premium quoting and simulation checks.

pub mod config;
pub mod published;
pub mod quote;
pub mod scenario;
pub mod verify;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const VERIFICATION_FAILED: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
}
