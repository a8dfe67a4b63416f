//! The chapters of the book under `book/src`, compiled as doc-tests so every
//! snippet keeps building against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/modules.md")]
pub mod modules {}
#[doc = include_str!("../../../book/src/invariants.md")]
pub mod invariants {}
#[doc = include_str!("../../../book/src/local-fields.md")]
pub mod local_fields {}
#[doc = include_str!("../../../book/src/quadratic.md")]
pub mod quadratic {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
