//! Verification suites and experiments behind the `lerw` binary.

pub mod commands;
pub mod report;

pub use report::{Check, Status, VerificationReport};

/// Exit codes: verification failures and bad input are kept apart.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
