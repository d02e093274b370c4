//! A simulation and verification lab for rank-one (and low-rank)
//! non-Hermitian perturbations of random matrices.
//!
//! Three perturbed families are covered — additive rank-one bumps of i.i.d.
//! matrices, anti-Hermitian bumps of Hermitian matrices, and multiplicative
//! rank-one defects of unitary matrices — together with the resolvent level
//! sets that characterize their spectra, eigenvalue-trajectory dynamics,
//! outlier localization domains, Gaussian power-series zero statistics, and
//! eigenvector overlap identities. Everything is deterministic given a
//! master seed, and a `verify` suite re-runs the battery of exact identities
//! and Monte Carlo checks.

pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod gaf;
pub mod io;
pub mod linalg;
pub mod models;
pub mod outliers;
pub mod overlaps;
pub mod poly;
pub mod trajectories;
pub mod verify;

pub use error::{LabError, Result};
