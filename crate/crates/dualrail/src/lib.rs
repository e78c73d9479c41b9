//! A truncated-Fock-space simulator for small quantum-optical circuits.
//!
//! The crate models multimode photonic circuits built from beamsplitters,
//! phase shifters, cross-Kerr cells, Fredkin gates, and amplitude-damping
//! channels, with both pure-state and density-matrix evolution. On top of
//! the circuit layer it provides the complete dual-rail Deutsch-Jozsa
//! machine: its state trajectories, its lossy runs, its post-selection
//! error-correction rule with the matching analytic error curves, its
//! classical (coherent-light) mode of operation, and a line-oriented
//! netlist language (`.qnl`) for describing circuits as text.
//!
//! Layers, bottom to top:
//!
//! * [`fock`] - basis indexing, [`FockVector`] / [`DensityOp`] states,
//!   operator embedding, Kraus channels, partial trace, photon counting.
//! * [`ops`] - constructors for the optical components and the
//!   truth-table oracle compiler.
//! * [`circuit`] - an ordered element list bound to modes, evaluated over
//!   either state representation.
//! * [`machine`] - the Deutsch-Jozsa machine builder and runners.
//! * [`postselect`] - outcome legality, conditional error probabilities,
//!   analytic closed forms, damping sweeps.
//! * [`netlist`] - parser, pretty-printer, and interpreter for `.qnl`
//!   files.
//!
//! Everything is immutable after construction: operations return new
//! values, so sweeps can evaluate configurations from multiple threads
//! without coordination.

pub mod circuit;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod machine;
pub mod netlist;
pub mod ops;
pub mod postselect;

pub use circuit::{Circuit, CircuitElement, InitialState, State};
pub use error::{Error, Result};
pub use fock::{DensityOp, FockBasis, FockVector, OutcomeDist};
pub use machine::{FunctionType, InputKind, MachineConfig, OracleSelector, Trajectory};
pub use netlist::{NetlistError, NetlistProgram};
pub use ops::{GateSpec, TruthTable, TruthTableClass};
pub use postselect::{ErrorCurve, RejectReason, Verdict};
