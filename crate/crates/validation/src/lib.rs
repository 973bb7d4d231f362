//! Acceptance suite for `pilot-brownian`.
//!
//! The checks live in `tests/acceptance.rs` and run with
//! `cargo test -p pilot-brownian-validation --test acceptance`. Each prints
//! one `PASS`/`FAIL` line; the target fails if any check fails.
