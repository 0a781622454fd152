//! Phase-space and Fresnel-zone numerics.
//!
//! * [`fock`]: number-state amplitudes, density matrices, displacement.
//! * [`wigner`]: the Wigner function by direct integration and by parity
//!   sums, rotated quadratures and Radon slices.
//! * [`semiclassics`]: Bohr-Sommerfeld bands and area-of-overlap statistics.
//! * [`fresnel`]: zones on a spherical wavefront and the on-axis field.
//! * [`spinmap`]: angular-momentum belts and their stereographic images.

pub mod error;
pub mod fock;
pub mod fresnel;
pub mod io;
pub mod numerics;
pub mod semiclassics;
pub mod spinmap;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockState, PhasePoint};
pub use fresnel::FresnelGeometry;
pub use spinmap::SpinSphere;
pub use wigner::{PhaseGrid, WignerField};
