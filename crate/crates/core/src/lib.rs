//! Symmetry-adapted rigidity analysis and finite-flex detection for bar-joint
//! frameworks with point-group symmetry.
//!
//! Pipeline: build a [`Framework`] and a [`TypeMap`] (how each symmetry
//! operation permutes vertices), wrap them in a [`SymmetricFramework`], then
//! read block ranks and counts, certify a symmetry-preserving flex with
//! [`certify::finite_flex_decision`] and follow it with [`trace::trace_flex`].
//!
//! Vertices are 0-based in the API and 1-based in files and cycle notation.
//! Configurations are flattened vertex-major.

pub mod blocks;
pub mod certify;
pub mod error;
pub mod framework;
pub mod io;
pub mod rank;
pub mod rep_theory;
pub mod symmetry;
pub mod trace;

pub use blocks::{
    AnalysisOptions, BlockDecomposition, GraphChoice, MaxwellRow, MaxwellTable, SymmetricFramework,
};
pub use certify::{CertifyPolicy, Criterion, FlexCertificate, Verdict};
pub use error::{Error, Result};
pub use framework::{Configuration, Framework, Graph};
pub use io::{builtin, cli, document};
pub use rank::{rank_with_tolerance, RankReport};
pub use symmetry::{Generator, GroupGeometry, GroupKind, SymmetryGroup, TypeMap};
pub use trace::{FlexPath, Monitor, TraceOptions};
