//! Grid realizations of semiclassical operators and observables.

mod antiwick;
mod grid;
mod operator;
mod weyl;

pub use antiwick::{antiwick_value, husimi, AntiWickValue, CoherentFrame, Husimi, MASS_FLOOR};
pub use grid::{max_spacing, points_per_wavelength, Boundary, Grid1D, MIN_POINTS};
pub use operator::{
    build_radial_channel, build_schrodinger, build_split, radial_grid, schrodinger_grid, split_grid, DiscreteOperator,
    GridPolicy, HermitianMatrix, OperatorForm, SymBanded,
};
pub use weyl::{build_weyl_observable, weyl_expectations, DENSE_LIMIT};
