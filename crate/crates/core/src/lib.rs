//! Uniformly bounded orthonormal holomorphic sections of `O(k)` over complex
//! projective space.
//!
//! The pipeline runs in three stages on top of exact Fubini–Study geometry:
//!
//! 1. coherent states peaked at lattice points pushed through exponential
//!    charts ([`frame`], [`kernel`]);
//! 2. Gram whitening by the inverse square root `Δ^{-1/2}` computed as a
//!    Neumann series, with an eigendecomposition cross-check ([`whitening`]);
//! 3. root-of-unity mixing into flat sections, with sup-norm certificates
//!    ([`flatten`], [`certify`]).
//!
//! The universal lattice constants live in [`constants`], and [`pipeline`]
//! ties everything together for the command line tool.

pub mod certify;
pub mod constants;
pub mod error;
pub mod flatten;
pub mod frame;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod mesh;
pub mod multiindex;
pub mod pipeline;
pub mod whitening;

pub use error::{Error, Result};
pub use geometry::{ChartRegion, ChartSpec, ManifoldModel, ProjectivePoint, UnitLift};
pub use kernel::{KernelModel, SectionExpansion};
