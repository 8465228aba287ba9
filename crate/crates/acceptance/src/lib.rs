//! Builds the end-to-end acceptance checks in `crates/core/tests/acceptance.rs`.
