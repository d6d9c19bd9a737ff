//! Numerical laboratory for the isotropic three-wave kinetic equation coupled
//! to a condensate.
//!
//! Spectra are handled in two forms. `F(X)` is the wave density, `V(X) = X F(X)`
//! its Rayleigh-Jeans-normalized counterpart. Operators that act on `V` say so
//! in their docs; the stationary family `F = c/X` is `V = c`.

pub mod collision;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linops;
pub mod mellin;
pub mod moments;
pub mod profile;
pub mod quad;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
pub use grid::{CutoffProfile, Grid, GridFunction};
pub use profile::Profile;
pub use quad::QuadOpts;
