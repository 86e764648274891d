//! Band-limited Slepian concentration bases on the sphere.
//!
//! Two solvers are provided for an arbitrary spherical-polygon region:
//! the dense conventional method ([`reference`]) and a reduced method
//! ([`region_slepian`]) that works in the truncated Slepian basis of an
//! enclosing polar cap. [`metrics`] compares the two.

pub mod error;
pub mod harmonics;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod polarcap;
pub mod quadrature;
pub mod reference;
pub mod region_slepian;
pub mod sphgeom;

pub use error::{Result, SlepError};
pub use harmonics::SpectralVector;
pub use polarcap::{solve_cap, CapSlepianBasis, Keep};
pub use quadrature::{EquiangularGrid, RegionMask};
pub use reference::{solve_conventional, ConventionalOptions, FullBasis};
pub use region_slepian::{solve_region, RegionOptions, RegionSlepianBasis};
pub use sphgeom::{Cap, EulerZYZ, Region, SphPoint};
