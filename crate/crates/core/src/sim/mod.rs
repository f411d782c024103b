//! Simulation configuration, the TTI loop, KPIs and multi-run experiments.

pub mod config;
pub mod engine;
pub mod experiment;
pub mod kpi;

pub use config::{parse_config, Algorithm, ConfigError, SimConfig};
pub use engine::{run_episode, stream_rng, SimError, Simulation, Stream, TraceRecord, TtiSummary};
pub use experiment::{run_experiment, run_experiment_with_seeds, run_seeds, ExperimentReport};
pub use kpi::{convergence_tti, DropRate, Estimate, RunReport, WindowCounts, SCALAR_METRICS};
