//! Design, simulation, and analysis toolkit for visible-wavelength
//! photonic-crystal cavities in thin-film diamond.
//!
//! The crate is organized by pipeline stage:
//! - [`units`]: wavelength/frequency/linewidth conversions and newtypes.
//! - [`geometry`]: tapered-nanobeam and triangular-lattice hole layouts,
//!   design-rule checks, JSON/CSV layout files.
//! - [`wave1d`]: transfer-matrix multilayer optics and the slab
//!   effective-index solver.
//! - [`fdtd`]: 2D effective-index FDTD with PML, monitors, snapshots,
//!   and mode volumes.
//! - [`bands`]: plane-wave expansion TE band structures and gap edges.
//! - [`fit`]: Lorentzian/dip/lifetime/antibunching fits, ringdown
//!   harmonic inversion, and multi-scan stability analyses.
//! - [`cqed`]: Purcell factors, cooperativity, and coupling budgets.
//! - [`disorder`]: Monte Carlo fabrication-tolerance and yield studies.
//! - [`io`]: binary field snapshots and the CSV interchange formats.

// `!(x > 0.0)` is the NaN-rejecting form of input validation used
// throughout; the positive comparison would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod cqed;
pub mod disorder;
pub mod fdtd;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod units;
pub mod wave1d;

pub use bands::{band_structure, te_bands, BandStructure, BandsConfig};
pub use cqed::{
    cooperativity, purcell_from_lifetimes, purcell_ideal, split_intrinsic_extrinsic, CqedReport,
    EmitterParams,
};
pub use disorder::{
    perturb, resonance_shift_perturbation, yield_study, yield_study_threads, DisorderModel,
    YieldReport,
};
pub use fdtd::{compute_mode_volume, rasterize, run_fdtd, FieldSnapshot, Grid2D, SimConfig};
pub use fit::{
    fit_exponential_lifetime, fit_g2, fit_lorentzian_peak, fit_reflection_dip, AxisKind, FitResult,
    Spectrum, TimeTrace,
};
pub use geometry::{
    design_rule_check, generate_1d_holes, generate_2d_holes, HoleList, Nanobeam1DSpec, Phc2DSpec,
};
pub use units::{Frequency, QualityFactor, Wavelength};
pub use wave1d::{slab_neff, transfer_matrix, LayerStack};
