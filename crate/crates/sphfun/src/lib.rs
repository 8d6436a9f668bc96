//! Quasi-radial spheroidal functions: eigenvalues and eigenfunctions of
//!
//! `(xi^2+1) X'' + 2 xi X' - [lambda + p^2 (xi^2+1) - a xi - m^2/(xi^2+1)] X = 0`
//!
//! on the whole real axis, from trigonometric and power expansions, plus the
//! levels of a finite-depth spheroidal ring.
//!
//! ```
//! use sphfun::{find_eigenvalue, SpectralParams};
//! let sol = find_eigenvalue(&SpectralParams::new(0, 0, 1.0, 0.0)).unwrap();
//! assert!((sol.lambda + 2.6541531338091).abs() < 1e-8);
//! ```

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod eigensolver;
pub mod error;
pub mod evaluator;
pub mod mapping;
pub mod model;
pub mod numerics;
pub mod ode;
pub mod oracle;
pub mod powersolver;
pub mod quadrature;
pub mod recurrence;
pub mod ring;

pub use eigensolver::{find_eigenvalue, match_determinant, top_eigenvalues};
pub use error::{Error, Result};
pub use evaluator::{count_nodes, eval_X, normalize, ode_residual, Normalization};
pub use model::{
    Diagnostics, EigenSolution, GridFunction, Parity, PowerSeriesRep, Representation, RingConfig, RingLevel,
    SpectralParams, TrigSeriesRep,
};
pub use powersolver::power_find_eigenvalue;
pub use ring::{ring_scan, ring_spectrum};
