//! Configuration, parameter sweeps, figure-data assembly, and persistence.

pub mod config;
pub mod emit;
pub mod point;
pub mod runner;

pub use config::{CanonicalConfig, ChainTemplate, GridSpec, OpSpec, OtocOps, SweepConfig};
pub use emit::{emit, parse_heatmap_csv};
pub use point::{run_point, PointBundle};
pub use runner::{run_sweep, SweepResult, Violation, ViolationKind};
