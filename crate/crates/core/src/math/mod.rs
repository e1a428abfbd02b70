//! Minimal fixed-size linear algebra over the generic scalar.

mod mat;
mod quat;
mod rigid;
mod vec;

pub use mat::{Mat2, Mat2x3, Mat3};
pub use quat::Quat;
pub use rigid::Rigid;
pub use vec::{Vec2, Vec3};
