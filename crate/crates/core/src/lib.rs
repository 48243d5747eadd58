//! Landau-Zener sweeps of a two-mode Bose-Einstein condensate.
//!
//! The crate propagates the mean-field and many-body models through a linear
//! sweep, builds the many-body spectrum and its avoided-crossing splittings,
//! and evaluates the independent crossing approximation together with its
//! macroscopic-limit closed forms.

pub mod error;
pub mod formula;
pub mod gamma;
pub mod ica;
pub mod magnus;
pub mod model;
pub mod ode;
pub mod propagate;
pub mod quadrature;
pub mod spectrum;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{Interaction, ManyBodyState, MeanFieldState, ModelParams, TridiagonalHamiltonian};
pub use ode::{IntegratorConfig, Method};
pub use propagate::{integrate_manybody, integrate_meanfield, SweepRecord, SweepWindow};
