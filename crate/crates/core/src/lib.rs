//! Time-domain acoustic scattering from a penetrable inhomogeneity.
//!
//! The scattered field of a sound-speed contrast supported in a ball is
//! computed from a volume integral equation of the second kind. Time is
//! discretized by convolution quadrature on a BDF1/BDF2 symbol in its
//! multi-frequency (scaled-DFT) form; each resulting Laplace-domain problem
//! is discretized by trigonometric collocation on a periodic grid, where the
//! periodized volume potential diagonalizes under the FFT, and solved by
//! GMRES, a two-grid defect correction, or a dense factorization.
//!
//! Module map:
//! - [`grid`]: periodic grids, nodal/Fourier representations, discrete norms
//! - [`kernel`]: Fourier coefficients of the truncated fundamental solution,
//!   closed forms plus a quadrature oracle, and the Bessel machinery
//! - [`operator`]: the FFT-diagonalized frequency-domain operator and its
//!   dense assembly
//! - [`solver`]: GMRES / two-grid / dense solves of one frequency problem
//! - [`cq`]: multistep symbols, frequency nodes, scaled transforms, the full
//!   time-domain pipeline and the space-time error metric
//! - [`disk`]: analytic transmission series for a disk, the single-frequency
//!   accuracy reference

pub mod bessel;
pub mod cq;
pub mod dense;
pub mod disk;
pub mod error;
mod fft;
pub mod grid;
pub mod kernel;
pub mod operator;
pub mod quadrature;
pub mod solver;

pub use cq::{
    bdf_delta, choose_lambda, frequency_nodes, run_cq_solve, scaled_forward_fields,
    scaled_forward_scalar, scaled_inverse_fields, scaled_inverse_scalar, spacetime_error_norm,
    spacetime_error_vs_reference, spacetime_norm, CqScheme, IncidentField, MultistepMethod,
    TimeDomainSolution,
};
pub use disk::{disk_series_coeffs, disk_series_field, DiskConfig, DiskSeries};
pub use error::{Error, Result};
pub use grid::{weighted_l2_norm, ContrastField, GridFunction, Repr, TrigGrid};
pub use kernel::{
    build_kernel_table, kernel_coeff, kernel_coeff_2d, kernel_coeff_3d,
    kernel_coeff_quadrature_oracle, ComplexFrequency, KernelTable,
};
pub use operator::{apply_volume_potential, FrequencyOperator};
pub use solver::{
    gmres_solve, solve_dense_oracle, solve_frequency, two_grid_solve, SolveMethod, SolveReport,
    SolverConfig,
};
