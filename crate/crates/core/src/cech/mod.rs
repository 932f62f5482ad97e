//! Cech total complexes of the `r`-gon covering of the Tate curve.
//!
//! A degree-`k` cochain is a family of degree-`k` forms on the charts
//! `Z_1..Z_r` and degree-`(k-1)` forms on the overlaps `W_1..W_r`; the total
//! differential is `D(a, b) = (d a, (-1)^k ∂a + d b)`, where `∂` restricts
//! `Z_n` to `W_n` and `W_{n-1}` with alternating signs. The same engine runs
//! on Hyodo-Kato sections (exact over `Q`) and on de Rham sections of the
//! fiber (over `K`), through [`LocalSection`].

pub mod classes;
pub mod complex;
pub mod section;

pub use classes::{class_matrix, hodge_f1, validate_basis, CohomologyClass};
pub use complex::{h_rank_estimate, lookahead, persistent_rank, CechComplex, Cochain, ComplexShape, RankEstimate};
pub use section::{BasisKey, DrEnv, HkEnv, LocalSection, TermKey};
