//! A lattice realization of path-integral quantum propagation in one
//! dimension.
//!
//! The engine builds short-time propagator kernels `(1/A) exp(i eps L / hbar)`
//! on a uniform spatial grid, composes them into finite-time kernels by the
//! multiply-in-succession rule, and propagates wave functions with them. An
//! independent Crank-Nicolson solver for the time-dependent Schrodinger
//! equation cross-validates the kernel evolution, and an amplitude-level
//! double-slit simulator reproduces the coherent, measured and partially
//! measured detection regimes.
//!
//! Default units are natural, `hbar = m = 1`; every quantity can be rescaled
//! through [`PhysicalConstants`].

pub mod action;
pub mod doubleslit;
pub mod error;
pub mod fresnel;
pub mod io;
pub mod kernel;
pub mod lattice;
pub mod schrodinger;
pub mod validation;

pub use action::{ActionValue, DiscretePath, PotentialModel};
pub use doubleslit::{Hole, PatternMode, ScreenPattern, SlitGeometry};
pub use error::{Error, Result};
pub use kernel::{NormalizationConstant, PropagatorMatrix};
pub use lattice::{PhysicalConstants, SpatialGrid, TimeSlicing, WaveFunction};
pub use schrodinger::HamiltonianStencil;
