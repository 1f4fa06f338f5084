//! Two Coulomb-coupled electrons in a two-dimensional isotropic harmonic
//! trap: singlet ground state, partial-wave Schmidt structure, and
//! entanglement diagnostics across the full range of the dimensionless
//! coupling g, including the strong-coupling (Wigner-molecule) limits.
//!
//! The pipeline solves the relative radial equation variationally, builds
//! the angular-channel kernels of the spatial wavefunction on shared
//! quadrature grids, Schmidt-decomposes each channel by the Nystrom
//! method, and reduces the spectra to collective occupancies, channel
//! purities, the participation ratio, the effective Slater rank, the
//! linear entropy, and the partial-wave count.
//!
//! Entry points:
//! - [`pipeline::analyze`] for one coupling,
//! - [`pipeline::sweep`] for a coupling ladder,
//! - [`wigner::asymptotic_spectrum`] for the strong-coupling study,
//! - the `harmonium` binary for the same three modes on the command line.

pub mod error;
pub mod measures;
pub mod numerics;
pub mod partial_waves;
pub mod pipeline;
pub mod radial;
pub mod report;
pub mod schmidt;
pub mod wavefunction;
pub mod wigner;

pub use error::{Error, Result};
pub use measures::{
    effective_slater_rank, linear_entropy, partial_wave_count, participation_ratio,
    PartialWaveCount,
};
pub use numerics::{build_radial_grid, symmetric_eigendecompose, AngularGrid, RadialGrid};
pub use partial_waves::{
    collective_occupancy, compute_kernel, compute_kernels, kernel_parity_overlap,
    PartialWaveKernel,
};
pub use pipeline::{analyze, sweep, AnalysisConfig};
pub use radial::{radial_residual, solve_ground_radial, taut_exact_u, RadialSolution,
    VariationalBasis};
pub use report::EntanglementReport;
pub use schmidt::{
    channel_participation, channel_purity, real_modes, reconstruct_psi, schmidt_decompose,
    ChannelSpectrum, SchmidtExpansion, SchmidtMode,
};
pub use wavefunction::{rel_cm_coords, RadialAmplitude, SpatialWavefunction};
pub use wigner::{
    asymptotic_spectrum, classical_radius, harmonic_u, HarmonicU, WignerAsymptotics, WignerConfig,
};
