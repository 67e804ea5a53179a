//! Deterministic SI, SIS and SIR epidemic models on strongly connected
//! weighted digraphs.
//!
//! The crate covers trajectory integration of the network models, spectral
//! threshold analysis via the Perron eigen-data of the contact matrix, and
//! the monotone fixed-point algorithms for the SIS endemic state and the
//! SIR asymptotic state. Scalar closed forms are included both as API and
//! as reference solutions.

pub mod equilibria;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod network;
pub mod scalar;
pub mod spectral;
pub mod threshold;

pub use equilibria::{
    sir_asymptotic, sir_asymptotic_bracketed, sis_endemic, sis_endemic_expansion_high_rate,
    sis_endemic_expansion_threshold, Bracket, EndemicResult, EndemicStart, SirAsymptoticResult,
    SirBracketReport, SirStart,
};
pub use error::{Error, Result};
pub use graph::Graph;
pub use matrix::Matrix;
pub use network::{
    initial_growth_approx, integrate, integrate_with, late_time_decay_rates, rhs,
    sir_conserved_quantities, Derivative, EpidemicState, IntegrationOptions, ModelKind,
    ModelParams, Trajectory,
};
pub use scalar::{
    scalar_rhs, si_closed_form, sir_rinf, sir_xmax, sis_closed_form, ScalarParams, ScalarState,
};
pub use spectral::{dominant_eig, dominant_eig_unchecked, effective_matrix, SpectralTriple};
pub use threshold::{
    effective_r_series, first_crossing, reproduction_number, time_to_subthreshold, Classification,
    ThresholdReport,
};
