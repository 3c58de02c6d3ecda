//! Shared fixtures for the criterion benchmarks.

use hpcgi_core::ObjectImage;

/// Deterministic object used by the reconstruction benchmarks.
pub fn fixture_object(level: u32) -> ObjectImage {
    ObjectImage::random(1 << level, 4095, 0xbe9c + level as u64).expect("power-of-two side")
}
