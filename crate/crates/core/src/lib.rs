//! Numerical core for the restricted spherical mean transform on the
//! hyperbolic disc H² and the round sphere S².
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//! jets for exact high-order operator evaluation, disc and sphere geometry,
//! radial eigenfunctions, Dirichlet spectra of geodesic balls, forward
//! operators, range certification and time-reversal reconstruction. File
//! formats, configuration and the command line live in the `sphmean` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod radial;
pub mod range;
pub mod sinogram;
pub mod spectrum;
pub mod timereversal;
pub mod transform;

pub use error::{Error, Result};
pub use field::{Bump, BumpKind, Field, ModeField, ModeKey, Parity, Phantom};
pub use geometry::{Geometry, Point, Space};
pub use jet::{Elementary, Jet};
pub use sinogram::Sinogram;
