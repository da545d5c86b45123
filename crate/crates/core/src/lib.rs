//! Linear models of homoclinic transition maps near 2-dimensional partially
//! hyperbolic tori in 3-degrees-of-freedom Hamiltonian systems.
//!
//! The crate builds the transition matrix `M_n = Π · Df_l^n` in Poincaré
//! section coordinates `(φ, s, ρ, u)`, computes its palindromic characteristic
//! polynomial both in closed form and through an independent trace oracle,
//! classifies the spectrum against the unit circle, and checks the asymptotic
//! eigenvalue laws that appear once the homoclinic matrix is transverse and the
//! torus has torsion.
//!
//! Module map:
//!
//! * [`symplectic`]: fixed-size matrices, the symplectic form, dense eigenvalues.
//! * [`linear_model`]: the linear Poincaré map `f_l` and its differential.
//! * [`homoclinic`]: the homoclinic matrix and the transversality hierarchy.
//! * [`spectrum`]: transition matrix, coefficients, S-reduction, classifier.
//! * [`asymptotics`]: eigenvalue laws and the δ-shear special case.
//! * [`dynamics`]: orbits, return times, transverse map and Easton windows.
//! * [`sweep`], [`verify`], [`cli`]: batch runs, property suites, front end.

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod homoclinic;
pub mod io;
pub mod linear_model;
pub mod precision;
pub mod spectrum;
pub mod sweep;
pub mod symplectic;
pub mod verify;

pub use config::{PrecisionMode, RunConfig, Tolerances};
pub use error::{Error, Result};
pub use homoclinic::{HomoclinicMatrix, TransversalityReport};
pub use linear_model::LinearModelParams;
pub use spectrum::{Classification, PalindromicQuartic, SpectrumReport};
pub use symplectic::{Mat4, Spectrum, Vec4};
