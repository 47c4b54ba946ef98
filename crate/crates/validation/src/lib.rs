//! Acceptance checks for the cdfem workspace. The suite lives in
//! `tests/acceptance.rs` and runs after every other test target.
