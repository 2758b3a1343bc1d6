//! Single-copy entanglement of quadratic fermion chains.
//!
//! The pipeline runs coupling table → symbol → Toeplitz block `T_L` →
//! singular values `μ_l` → entanglement quantities. An exact-diagonalization
//! oracle and scaling fits sit on top.

pub mod asymptotics;
pub mod dense;
pub mod entangle;
pub mod error;
pub mod lp;
pub mod oracle;
pub mod model;
pub mod quad;
pub mod serde_ext;
pub mod toeplitz;

pub use error::{Error, Result};
pub use model::{classify_criticality, Jump, ModelLabel, ModelSpec, Preset, SymbolProfile};
pub use toeplitz::{
    block_spectrum, build_gamma, build_t, fourier_coefficient, BlockSpectrum, CoeffMethod, ToeplitzCoeffs,
    DEFAULT_ABS_TOL,
};
pub use entangle::{
    nielsen_transformable, probabilistic_ep, report, sector_decompose, single_copy_e1, EntanglementReport,
    Occupation, ReportOptions, Sector, SortedSpectrum,
};
pub use oracle::{compare_oracle, exact_diag_ground, finite_gaussian_ground, FiniteChain, MethodPair, OracleComparison};
pub use asymptotics::{
    bound_chain, default_grid, fh_slope, fh_slope_from_series, fit_log, geometric_grid, integral_check, saturation_test,
    scan, BoundChain, FhFit, IntegralCheck, Quantity, ScalingFit, ScanRow, ScanSeries,
};
