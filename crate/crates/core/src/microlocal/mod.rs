//! Quantum measures of eigenstates and window sums.

mod measures;
mod observable;
mod trace;

pub use measures::{nu, upsilon, MicrolocalRecord, Quantization, WindowMeasures};
pub use observable::Observable;
pub use trace::{smoothed_trace, TestFunction};
