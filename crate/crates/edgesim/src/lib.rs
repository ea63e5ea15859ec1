//! Queueing-model-driven resource management for DNN inference workloads on
//! shared edge accelerators.
//!
//! The crate has three layers:
//!
//! * analytic predictors for the multiplexing disciplines edge accelerators
//!   exhibit (FCFS with context switches, time sharing, batching, limited
//!   request parallelism) and their end-to-end composition ([`analytic`],
//!   fed by [`profiles`]);
//! * a deterministic discrete-event simulator of the same queueing network
//!   that doubles as the ground-truth oracle for those predictors
//!   ([`desim`]);
//! * resource management built on the predictors: latency-aware online
//!   knapsack placement with heterogeneous and grouped variants
//!   ([`placement`]), and runtime policing plus hotspot migration
//!   ([`dynamics`]).
//!
//! [`workload`] generates application traces, [`scenario`] loads experiment
//! descriptions, and [`experiments`] + [`cli`] drive the reproduction
//! experiments.

pub mod analytic;
pub mod placement;
pub mod profiles;
pub mod rng;
pub mod workload;
