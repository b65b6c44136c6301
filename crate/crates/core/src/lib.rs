//! Exact and high-precision computations around Hecke-Mahler series
//! `f_w(u, v) = sum_{l>=1} sum_{h=1}^{[l w]} u^l v^h` for quadratic slopes `w`.

pub mod cyclo;
pub mod error;
pub mod lattice;
pub mod mat;
pub mod numeric;
pub mod qfield;
pub mod rfun;
pub mod semifree;
pub mod series;
pub mod torus;

pub use error::{HmxError, Result};
pub use lattice::{DualData, ZModule};
pub use qfield::{CFExpansion, QuadNum, ReductionResult, Q};
pub use rfun::{RationalFn2, Slope, Variant};
pub use semifree::{decide, SemiFreeTuple, Verdict};
pub use series::{EvalConfig, SeriesValue};
pub use torus::{NumPoint, PerronFrame};
