//! Discrete-time plant-herbivore maps with pluggable plant growth laws.
//!
//! The crate is organized bottom-up:
//!
//! - [`growth`]: single-species growth laws, their derivatives and fixed points
//! - [`system`]: the coupled Model I / Model II maps and their Jacobians
//! - [`equilibrium`]: boundary and interior equilibria, threshold predicates
//! - [`bifurcation`]: Neimark-Sacker and collapse curves, attractor scans
//! - [`bursting`]: noise-driven herbivore bursts and their statistics
//! - [`io`], [`cli`], [`reproduce`]: CSV/JSON output and the command line

pub mod bifurcation;
pub mod bursting;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod growth;
pub mod io;
pub mod reproduce;
pub mod rng;
pub mod roots;
pub mod system;

pub use error::{Error, Result};
pub use growth::{GrowthLaw, GrowthModel, ModelFamily, PlantEquilibriumSet, PlantStability};
pub use system::{eigenvalues, Mat2, State, SystemSpec, Trajectory, Variant};
