//! Numerical building blocks shared by the physics modules.

pub mod eigen;
pub mod interp;
pub mod quad;
pub mod special;
pub mod sum;
