//! Numerical core for moment-summability of formal power series solutions
//! of linear moment PDEs.

pub mod analysis;
pub mod characteristic;
pub mod error;
pub mod moments;
pub mod operators;
pub mod pade;
pub mod quadrature;
pub mod resummation;
pub mod scaled;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use moments::{kernel_pair_for, rat, KernelPair, MomentFunction, Rational};
pub use scaled::ScaledComplex;
pub use series::{BiSeries, RamifiedSeries};
