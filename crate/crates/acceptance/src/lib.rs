// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance checks for `fcpd` live in `tests/acceptance.rs`. They sit in
//! their own package so `cargo test --workspace` runs them after every other
//! suite.
