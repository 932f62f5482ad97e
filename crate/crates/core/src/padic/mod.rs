//! Capped-precision arithmetic in `Q_p` and in totally ramified extensions.

pub mod context;
pub mod field;
pub mod parse;
pub mod scalar;
pub mod teichmuller;

pub use context::PadicContext;
pub use field::{FieldDescriptor, KElement, Normalization, Valuation};
pub use scalar::PadicScalar;
pub use teichmuller::{teichmuller, unit_decompose, UnitDecomposition};
