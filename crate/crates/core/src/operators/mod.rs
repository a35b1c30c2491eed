//! The linear operator `T`, the bilinear operator `𝓑`, symbol assembly and
//! kernel transposes.

mod bilinear;
mod linear;
pub mod symbol;

pub use bilinear::{
    apply_bilinear, bilinear_oracle, pairing, remap, transpose_dlambda_factor, transpose_kernel,
    BilinearKernel, Resample,
};
pub use linear::{apply_linear, apply_linear_spatial, BAND_TOL};
pub use symbol::{
    active_dilates, assemble_symbol, assemble_symbol_2d, dilates_meeting, DyadicSymbol1D,
    DyadicSymbol2D, FnSymbol1D, FnSymbol2D, JRange, ProfileSymbol, RadialSymbol, SampledSymbol1D,
    SampledSymbol2D, Slot, Symbol1D, Symbol2D, TensorSymbol, TransposedSymbol, TRANSPOSE_NORM,
};
