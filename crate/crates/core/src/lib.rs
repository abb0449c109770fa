//! Semiclassical spectral laboratory.
//!
//! Discretizes Schrödinger and pseudo-differential operators, extracts the
//! eigenpairs whose eigenvalues fall in shrinking windows `[E_c - d h, E_c + d h]`
//! around a critical energy, and measures how the eigenfunctions distribute
//! in phase space: concentration at the equilibrium when the Liouville
//! measure of the critical level is not integrable, the normalized Liouville
//! measure otherwise.
//!
//! Module map:
//! - [`model`]: polynomial symbols, critical points, hypothesis checks, catalog
//! - [`quantize`]: grids, operator realizations, Weyl and anti-Wick observables
//! - [`eig`]: Sturm bisection, inverse iteration, dense Hermitian solver, radial channels
//! - [`classical`]: Liouville integrals, integrability, Hamiltonian flow, level sets
//! - [`microlocal`]: the measures `nu_j(a)`, window sums and smoothed traces
//! - [`experiments`]: scaling laws, h-scans, fits and the scenario runner
//! - [`cli`]: observable parser, run configuration, subcommands

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical;
pub mod cli;
pub mod eig;
pub mod error;
pub mod experiments;
pub mod microlocal;
pub mod model;
pub mod quantize;
mod util;

pub use error::{Error, Result};
