//! Thermoacoustic tomography on the unit sphere: phantoms, forward data,
//! radial transforms and closed-form reconstruction formulas.

pub mod error;
pub mod forward;
pub mod grids;
pub mod numerics;
pub mod phantom;
pub mod recon;
pub mod specfun;
pub mod validate;
pub mod xform;

pub use error::{Result, TatError};
