//! Multi-view clustering on anchor bipartite graphs with a tensor Schatten
//! p-norm coupling across views.
//!
//! The pipeline: select M anchors per view, build N×M anchor graphs, then
//! alternate between a spectral embedding of the shared bipartite graph, a
//! t-SVD proximal step that pulls the per-view graph stack toward a common
//! low-rank tensor, and per-row simplex-projected graph updates. A hidden
//! connectivity weight is doubled or halved until the shared graph has the
//! requested number of connected components, and cluster labels are read
//! directly off those components — no k-means post-processing.
//!
//! Modules:
//! - [`tensor`]: third-mode FFT, tensor Schatten p-norm, and its proximal
//!   operator (generalized singular-value shrinkage).
//! - [`anchor`]: anchor selection, sample-to-anchor distances, initial
//!   graph construction.
//! - [`bipartite`]: degrees, the normalized affinity, zero-eigenvalue
//!   counting, connected components, label extraction.
//! - [`solver`]: the alternating-minimization loop.
//! - [`metrics`]: ACC/NMI/Purity and pair-counting metrics.
//! - [`synth`]: a seeded multi-view blob generator for tests and demos.

pub mod anchor;
pub mod bipartite;
pub mod linalg;
pub mod metrics;
pub mod solver;
pub mod synth;
pub mod tensor;

use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed data: non-finite entries, shape mismatches, corrupted
    /// spectral tensors.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A tunable outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
