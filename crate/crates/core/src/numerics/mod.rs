//! Small numerical building blocks shared by the transforms: Gauss–Legendre
//! rules, fourth-order difference stencils and local cubic interpolation.

pub mod gauss;
pub mod interp;
pub mod stencil;

pub use gauss::GaussLegendre;
pub use interp::{cubic_stencil, CubicStencil};
pub use stencil::{derivative4, derivative4_into};
