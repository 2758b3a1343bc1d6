//! Shared inputs for the benchmarks.

use onecopy_core::{ModelSpec, SortedSpectrum};

/// One critical and one gapped chain.
pub fn models() -> [(&'static str, ModelSpec); 2] {
    [
        ("xx", ModelSpec::xx(2.0).expect("xx preset")),
        ("xy", ModelSpec::xy(0.5, 0.5).expect("xy preset")),
    ]
}

/// Geometric spectrum of length `len` with ratio `q`.
pub fn geometric_spectrum(len: usize, q: f64) -> SortedSpectrum {
    let raw: Vec<f64> = (0..len).map(|k| q.powi(k as i32)).collect();
    let total: f64 = raw.iter().sum();
    SortedSpectrum::from_unsorted(raw.into_iter().map(|v| v / total).collect()).expect("valid spectrum")
}
