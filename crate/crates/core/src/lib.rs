//! Integral homology of the real Grassmannian `G_{n,m}(R)` from its Witten
//! (Morse) complex, together with numerical checks of the gradient flow that
//! underlies the incidence numbers.
//!
//! The Morse function is `f = det(X X^T) / det(X L^{-2} X^T)` for a spectrum
//! `0 < l_1 < ... < l_n`, where `X` is an `m x n` matrix whose rows span the
//! plane. Its critical points are the coordinate planes, labelled by
//! `m`-subsets of `{1, ..., n}`.

mod error;

pub mod chain;
pub mod combinatorics;
pub mod flow;
pub mod geometry;
pub mod snf;

pub use chain::{boundary_square_residual, build_complex, incidence_coefficient, ChainComplex, SignConvention};
pub use combinatorics::{enumerate_critical_points, index_census, lowerings, morse_index, CriticalPoint, Lowering};
pub use error::{Error, Result};
