pub mod amp;
pub mod error;
pub mod experiments;
pub mod fixed_point;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod scalar;
pub mod spiked;
pub mod worst_case;

pub use error::{Error, Result};
pub use measures::{Atom, DiscreteMeasure};
