//! Keeps the guide honest: each chapter of `book/` is included as module
//! documentation, so `cargo test --doc -p interfere-book` compiles and runs
//! every Rust snippet against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fock-space.md")]
pub mod fock_space {}

#[doc = include_str!("../../../book/src/beam-splitter.md")]
pub mod beam_splitter {}

#[doc = include_str!("../../../book/src/gaussian-states.md")]
pub mod gaussian_states {}

#[doc = include_str!("../../../book/src/exponent-tensors.md")]
pub mod exponent_tensors {}

#[doc = include_str!("../../../book/src/phase-space.md")]
pub mod phase_space {}

#[doc = include_str!("../../../book/src/conditional-preparation.md")]
pub mod conditional_preparation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
