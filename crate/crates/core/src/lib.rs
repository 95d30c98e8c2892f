//! Steady states, linear stability, time evolution and parameter sweeps of the
//! mean-field model of two laser-driven cavity modes coupled to an ensemble of
//! four-level atoms with cross decay between the two transitions.
//!
//! The fixed points are found through a degree-7 polynomial in the population
//! inversion of the first transition ([`steady_state::polynomial_in_x1`]), lifted to
//! full states and polished by Newton iteration on the complete equations of
//! motion. Stability follows from the Jacobian spectrum restricted to the
//! population-conserving hyperplane.

pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod poly;
pub mod steady_state;
pub mod sweep;

pub use error::{BistabError, Result};
pub use model::{cooperativity, validate, MeanFieldState, Mode, SystemParams};
pub use steady_state::{find_all_roots, SolutionSet, SteadyState};
