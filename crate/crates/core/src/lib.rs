//! Pseudo-spectral toolkit for rotating compressible flow in a horizontally
//! periodic slab at low Mach and Rossby number.
//!
//! The pieces:
//!
//! * [`grid`], [`field`], [`transform`], [`ops`], [`cutoff`], [`symmetry`]:
//!   the spectral substrate shared by everything else.
//! * [`wave`]: exact per-mode propagator of the linear acoustic-Rossby
//!   system and dispersive-decay measurements.
//! * [`kernel`]: the stationary (geostrophic) subspace of that system and
//!   the orthogonal split of initial data.
//! * [`qg`]: the quasi-geostrophic limit equation.
//! * [`ns`]: the scaled compressible Navier-Stokes system with fast
//!   rotation and low Mach number.
//! * [`diagnostics`]: relative entropy, uniform bounds and limit errors.
//! * [`io`]: CSV and binary field dumps.
//! * [`cases`]: built-in initial data; [`selftest`]: the acceptance checks.

pub mod cases;
pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod ns;
pub mod ops;
pub mod qg;
pub mod random;
pub mod selftest;
pub mod symmetry;
pub mod transform;
pub mod wave;

pub use cutoff::CutoffSpec;
pub use error::{Error, Result};
pub use field::{Parity, ScalarField, SpectralField, VectorField};
pub use grid::SlabGrid;
pub use kernel::{DataSplit, KernelPair};
pub use ns::{FluidState, NsConfig, NsTrajectory, PressureLaw};
pub use qg::{LimitState, QgTrajectory};
pub use wave::{DecayReport, EigenSystem, ModeSymbol, Propagator, WaveState};
