//! Desk-scale simulator for a 1-D nonlinear wave equation with frictional
//! damping, an exponential viscoelastic memory, and a tempered fractional
//! flux condition at one end of the interval, realized through a diffusive
//! family of damped scalar modes.  Alongside the solver it evaluates the
//! trajectory functionals the qualitative theory is phrased in — energy and
//! its dissipation balance, potential-well and Lyapunov quantities, and the
//! blow-up indicators with their closed-form time bounds — so decay and
//! blow-up statements can be checked as numerical properties.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fracdiff;
pub mod mms;
pub mod series;
pub mod viscomem;
pub mod wavesolver;

pub use config::{parse_config, preset, JobConfig, Profile, RunConfig, ScenarioId};
pub use diagnostics::{
    BlowupAssessment, BlowupCase, DecayFit, DomainConstants, GlobalCheck, LyapunovParams, Snapshot,
};
pub use error::{ConfigError, DiagnosticsError, Error, GridError, KernelError};
pub use fracdiff::{DiffusiveGrid, DiffusiveState, FracParams, GridSpec};
pub use mms::{ConvergenceReport, ManufacturedForcing};
pub use series::{FunctionalSeries, Row, CSV_HEADER};
pub use viscomem::{ExpKernel, MemoryAccumulators};
pub use wavesolver::{
    run, Domain1D, RightBoundary, SimState, Simulation, Termination, TerminationReason,
};
