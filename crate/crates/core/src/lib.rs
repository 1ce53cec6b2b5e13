pub mod caps;
pub mod cloning;
pub mod density;
pub mod dyadic;
pub mod elementary;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod machine;
pub mod randomness;
pub mod sampling;
pub mod snapshot_io;

pub use error::{QaeError, Result};
