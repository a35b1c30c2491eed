//! Dyadic Fourier multipliers, Littlewood–Paley square functions, rough bilinear
//! kernels and their extremal families on periodic grids.

pub mod analysis;
pub mod bumps;
pub mod error;
pub mod experiments;
pub mod extremals;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod packet;
pub mod rough;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
