//! The invariant metric in chart coordinates and the gradient of `f`.
//!
//! In a chart with free block `Z` the metric is
//! `g = tr[(I + Z Z^T)^{-1} dZ (I + Z^T Z)^{-1} dZ^T]`, whose row-major matrix
//! is the Kronecker product `(I + Z Z^T)^{-1} ⊗ (I + Z^T Z)^{-1}`. The first
//! factor is written through the cofactors `A_ij` of `X X^T = I + Z Z^T`.

use nalgebra::DMatrix;

use super::{cofactors, row_gram, scaled_row_gram, ChartPoint, Spectrum};
use crate::error::{Error, Result};

fn column_gram(p: &ChartPoint) -> DMatrix<f64> {
    let z = p.coords();
    DMatrix::identity(z.ncols(), z.ncols()) + z.transpose() * z
}

/// `G` with blocks `A_{ab} (I + Z^T Z)^{-1} / Delta`.
pub fn metric_matrix(p: &ChartPoint) -> Result<DMatrix<f64>> {
    let gram = row_gram(&p.implied_matrix());
    let delta = gram.determinant();
    let a = cofactors(&gram) / delta;
    let inv_cols = column_gram(p)
        .try_inverse()
        .ok_or_else(|| Error::InternalConsistency("I + Z^T Z is singular".into()))?;
    Ok(a.kronecker(&inv_cols))
}

/// `G^{-1}` with blocks `<xi_a, xi_b> (I + Z^T Z)`.
pub fn metric_inverse(p: &ChartPoint) -> DMatrix<f64> {
    row_gram(&p.implied_matrix()).kronecker(&column_gram(p))
}

/// `df/dx` at the free coordinates, as an `m x (n - m)` matrix, from
/// `dDelta/dx_{ij} = 2 sum_a x_{aj} A_{ai}` and the analogous formula for
/// `Delta-bar` with `x_{aj} / l_j^2`.
pub fn euclidean_partials(p: &ChartPoint, s: &Spectrum) -> Result<DMatrix<f64>> {
    s.check(p.n())?;
    let x = p.implied_matrix();
    let gram = row_gram(&x);
    let gram_bar = scaled_row_gram(&x, s);
    let (delta, delta_bar) = (gram.determinant(), gram_bar.determinant());
    let (a, a_bar) = (cofactors(&gram), cofactors(&gram_bar));

    let m = p.m();
    let comp = p.chart().complement();
    let mut out = DMatrix::zeros(m, comp.len());
    for (col, &j) in comp.iter().enumerate() {
        let lsq = s.squared(j);
        for i in 0..m {
            let mut d_delta = 0.0;
            let mut d_delta_bar = 0.0;
            for alpha in 0..m {
                let xa = x[(alpha, j - 1)];
                d_delta += xa * a[(alpha, i)];
                d_delta_bar += xa / lsq * a_bar[(alpha, i)];
            }
            d_delta *= 2.0;
            d_delta_bar *= 2.0;
            out[(i, col)] = (d_delta * delta_bar - delta * d_delta_bar) / (delta_bar * delta_bar);
        }
    }
    Ok(out)
}

/// `grad f = G^{-1} df`, reshaped to `m x (n - m)`. With the Kronecker form
/// of `G^{-1}` this is `(I + Z Z^T) df (I + Z^T Z)`.
pub fn gradient(p: &ChartPoint, s: &Spectrum) -> Result<DMatrix<f64>> {
    let df = euclidean_partials(p, s)?;
    Ok(row_gram(&p.implied_matrix()) * df * column_gram(p))
}

/// The gradient in the factored form
/// `-(2 Delta / Delta-bar^2) (I + Z Z^T) A-bar (Z L_K^{-2} - L_I^{-2} Z)`,
/// where `L_I`, `L_K` hold the weights of the chart and complement labels.
pub fn gradient_structured(p: &ChartPoint, s: &Spectrum) -> Result<DMatrix<f64>> {
    s.check(p.n())?;
    let x = p.implied_matrix();
    let gram = row_gram(&x);
    let gram_bar = scaled_row_gram(&x, s);
    let (delta, delta_bar) = (gram.determinant(), gram_bar.determinant());
    let a_bar = cofactors(&gram_bar);

    let z = p.coords();
    let comp = p.chart().complement();
    let labels = p.chart().subset();
    let spread = DMatrix::from_fn(z.nrows(), z.ncols(), |b, col| {
        (1.0 / s.squared(comp[col]) - 1.0 / s.squared(labels[b])) * z[(b, col)]
    });
    Ok(gram * a_bar * spread * (-2.0 * delta / (delta_bar * delta_bar)))
}
