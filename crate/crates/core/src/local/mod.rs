//! ℓ-adic backend: truncated arithmetic in towers of local fields and the
//! Kummer towers `K = F(a^(1/p))` built on top of it.

pub mod classes;
pub mod field;
pub mod kummer;
pub mod residue;

pub use field::{LevelKind, LocalElement, LocalField};
pub use residue::{Residue, ResidueField};
pub use kummer::{make_base, make_k, ExtensionShape, LocalBase, LocalTower};
