pub mod cech;
pub mod chart;
pub mod error;
pub mod exec;
pub mod kim_hain;
pub mod linalg;
pub mod log;
pub mod padic;
pub mod phin;
pub mod pipeline;

pub use error::{HkError, Result};
pub use exec::Exec;
