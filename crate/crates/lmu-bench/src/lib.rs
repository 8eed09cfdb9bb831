pub use lmu_core::*;
