//! Shared fixtures for the benchmarks.

use hmx_core::QuadNum;

/// `sqrt(2) - 1`.
pub fn silver_theta() -> QuadNum {
    QuadNum::from_literal_parts(-1, 1, 2, 1).expect("valid literal")
}
