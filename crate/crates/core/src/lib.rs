//! harmlab: a numerical laboratory for energy-minimizing (harmonic) maps
//! from discretized equivariant domains into nonpositively curved model
//! spaces, including a stratified degenerate-metric target whose boundary
//! behavior mirrors length/twist degeneration.
//!
//! The crate is organized around five pieces:
//!
//! - [`space`]: the CAT(0) model-space substrate (distances, geodesics,
//!   midpoints, Fréchet means, quadruple checks).
//! - [`cusp`] and [`wp`]: one degenerate cusp factor and the stratified
//!   product model built from it (metric tensor, Christoffel symbols,
//!   twist isometries, displacement functional, stratum bookkeeping).
//! - [`graph`]: gain-graph domains, discrete energy, the L2 distance
//!   between equivariant maps, and geodesic homotopies.
//! - [`solver`]: energy minimization by vertexwise Fréchet-mean relaxation
//!   plus chart diagnostics (PDE residual, subsolution fit, empirical
//!   uniqueness).
//! - [`config`], [`scenario`], [`report`]: the scripted experiments behind
//!   the `harmlab` command-line interface.

pub mod audit;
pub mod config;
pub mod cusp;
pub mod error;
pub mod graph;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod space;
pub mod wp;

pub use error::{Error, Result};
pub use space::{product_space, NpcSpace, SpacePoint};
