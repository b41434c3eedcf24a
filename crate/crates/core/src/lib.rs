//! Spectral sloshing eigenmodes, modal dynamics and exact boundary control
//! for a two-dimensional container, built on Chebyshev expansions of the
//! finite Hilbert transform.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks

pub mod chebyshev;
pub mod control;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod par;
pub mod spectrum;

pub use chebyshev::{ChebSeries, QuadratureRule, RuleKind, SecondKindSeries};
pub use control::{ControlSolution, InjectionPlan};
pub use domain::DomainWeight;
pub use dynamics::{Forcing, ModalData, ModalState, Observability};
pub use error::{Result, SloshError};
pub use hilbert::{MomentPair, WeightedSeries};
pub use spectrum::{BasisFamily, BasisSpec, ModeSet, SolveOptions};
