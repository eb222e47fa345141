use thiserror::Error;

/// Errors raised by framework construction and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex count must be positive")]
    EmptyGraph,
    #[error("edge {index} is a loop at vertex {vertex}")]
    Loop { index: usize, vertex: usize },
    #[error("edge {index} {{{a}, {b}}} is a duplicate")]
    DuplicateEdge { index: usize, a: usize, b: usize },
    #[error("edge {index} references vertex {vertex}, but the graph has {count} vertices")]
    VertexOutOfRange {
        index: usize,
        vertex: usize,
        count: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value at {0}")]
    NonFinite(String),
    #[error("invalid group geometry: {0}")]
    Geometry(String),
    #[error("invalid permutation for `{element}`: {reason}")]
    Permutation { element: String, reason: String },
    #[error("`{element}` is not a graph automorphism: edge {{{a}, {b}}} maps to non-edge {{{ia}, {ib}}}")]
    NotAutomorphism {
        element: String,
        a: usize,
        b: usize,
        ia: usize,
        ib: usize,
    },
    #[error("type map is not a homomorphism at ({x}, {y})")]
    NotHomomorphism { x: String, y: String },
    #[error("configuration violates the symmetry: residual {residual:.3e} at element `{element}`, vertex {vertex} exceeds {tolerance:.3e}")]
    SymmetryViolated {
        element: String,
        vertex: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error(
        "block-diagonalization failed: off-block residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    OffBlockResidual { residual: f64, tolerance: f64 },
    #[error("irrep index {index} out of range (group has {count} irreducible characters)")]
    IrrepOutOfRange { index: usize, count: usize },
    #[error("the fixed subspace is zero-dimensional")]
    EmptyFixedSpace,
    #[error("no fully symmetric infinitesimal flex")]
    NoSymmetricFlex,
    #[error("flex tracing requires a finite-flex certificate (verdict: {0})")]
    NotCertified(String),
    #[error("corrector diverged at frame {frame} (step {step:.3e})")]
    CorrectorDiverged { frame: usize, step: f64 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document: {0}")]
    Document(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
