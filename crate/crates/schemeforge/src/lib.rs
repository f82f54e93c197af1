//! schemeforge: per-field numerical scheme selection plus a unified solver kit.
//!
//! The crate has two halves that meet in the middle:
//!
//! * A decision engine (`problem_spec`, `classifier`, `scheme_selector`) that
//!   reads a declarative problem description, classifies every governed field
//!   (PDE type, linearity, hardware and scale context) and walks a fixed
//!   decision graph to assign one of FDM / FVM / CGM / DGM per field.
//! * A solver kit (`mesh`, `solver_fd`, `solver_cg`, `solver_dg`,
//!   `time_integrator`) that backs the assignments with runnable
//!   discretizations and makes the cross-scheme claims checkable: the
//!   collocated Q1 continuous-Galerkin operator reproduces the finite
//!   difference stencil node for node, and the p=0 discontinuous-Galerkin
//!   update degenerates to a first-order finite volume update.
//!
//! `metrics` and `bench` provide the measurement layer (analytic references,
//! error norms, timing harness), `problems` wires the bundled benchmark
//! families, and `cli` exposes the classify / solve / verify / bench
//! subcommands used by the thin binary.

pub mod bench;
pub mod classifier;
pub mod cli;
pub mod mesh;
pub mod metrics;
pub mod problem_spec;
pub mod problems;
pub mod report;
pub mod scheme_selector;
pub mod solver_cg;
pub mod solver_dg;
pub mod solver_fd;
pub mod time_integrator;
