//! Spectral analysis of the annealed random graph with Pareto fitness and
//! kernel `p_ij = 1 - exp(-eps x_i x_j)`.

pub mod analytic_eigenvectors;
pub mod analytic_spectrum;
pub mod bulk_analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod numerical_spectrum;
pub mod roots;
pub mod rng;
pub mod special_functions;

pub use error::{Error, Result};
