//! The three concrete model spaces.

pub mod free;
pub mod half_plane;
pub mod lamplighter;
pub mod probe;

pub use free::{FreeGroupModel, Ray};
pub use half_plane::{HalfPlaneModel, HPoint};
pub use lamplighter::LamplighterModel;
pub use probe::{acylindricity_probe, AcylindricityReport};
