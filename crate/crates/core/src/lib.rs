//! Galois module structure of `J = K^×/K^×p` for cyclic Kummer extensions
//! `K = F(a^{1/p})`.
//!
//! [`gmodule`] holds the `F_p[G]`-module theory, [`local`] and [`quadratic`]
//! the two field backends, [`structure`] the arithmetic decomposition of `J`,
//! and [`case`] the report and corpus machinery behind the `pclass` binary.

pub mod case;
pub mod error;
pub mod expr;
pub mod fplin;
pub mod gmodule;
pub mod local;
pub mod quadratic;
pub mod structure;
pub mod tower;

pub use error::{Error, Result};
