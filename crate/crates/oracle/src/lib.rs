//! Slow reference computations for cross-checking `slosh-core`.
//!
//! Nothing in here shares code paths with the library under test: principal
//! values are computed by singularity subtraction plus adaptive Gauss–Kronrod
//! quadrature, time evolution by an adaptive Dormand–Prince integrator, and
//! Chebyshev fits by dense least squares. Everything favours accuracy over
//! speed.

pub mod collocation;
pub mod lsq;
pub mod ode;
pub mod pv;
pub mod quad;
pub mod special;

pub use lsq::chebyshev_least_squares;
pub use ode::integrate as integrate_ode;
pub use quad::integrate;
