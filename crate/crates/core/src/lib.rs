//! Random-walk laboratory for Eulerian digraphs.
//!
//! The crate models directed multigraphs with in-degree equal to out-degree
//! at every vertex, builds lazy walk kernels on top of them, and measures the
//! quantities that make the Eulerian setting interesting: total-variation and
//! relative-L∞ mixing profiles, spectral profiles with their integral mixing
//! bound, hitting/commute/cover/exploration times, and collision times with
//! moving targets. A set of audit routines checks every closed-form bound
//! against exact linear-algebra or Monte Carlo measurements.
//!
//! The headline experiment lives in [`sensitivity`]: on a two-cycle gadget
//! the mixing time scales like `n^{3/2}` when the holding probabilities on
//! half of one cycle are set to the golden-ratio conjugate, against `n^2`
//! for uniform laziness — mixing times of non-reversible chains are not
//! robust to laziness changes.

pub mod chain;
pub mod corpus;
pub mod error;
pub mod explore;
pub mod graph;
pub mod hitting;
pub mod linalg;
pub mod mixing;
pub mod report;
pub mod rng;
pub mod sensitivity;
pub mod spectral;

pub use chain::{DistributionVector, Holding, LazyChain, WalkPath};
pub use error::{Error, Result};
pub use graph::{EulerianMultigraph, GadgetSpec, GraphClass, TwoCycleGadget, VertexId};
pub use mixing::{DistanceProfile, Metric, ThresholdOutcome, ThresholdReport};
pub use report::{AuditVerdict, ExperimentReport, OutputFormat};
pub use spectral::{SetSpectrum, SpectralProfile};
