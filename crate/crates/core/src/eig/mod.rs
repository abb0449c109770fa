//! Eigenpairs inside shrinking spectral windows.

pub mod band;
pub mod dense;
mod radial;
mod window;

pub use band::{bisect_eigenvalues, count_in, inertia_below, inverse_iteration, sturm_count};
pub use dense::{ql_eigenvalues, tridiagonalize, Tridiagonal};
pub use radial::{radial_windows, RadialOptions};
pub use window::{default_eps_lambda, eigenpairs_in, eigs_in_window, window_interval, EigenPair, EigenWindow};
