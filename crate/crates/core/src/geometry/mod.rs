//! Charts on `G_{n,m}(R)`, the Morse function and its Hessian.
//!
//! A point of the chart `U_I`, `I = {i_1 < ... < i_m}`, is an `m x n` matrix
//! whose columns `I` form the identity; the remaining columns, taken in the
//! order of the complement labels `k_1 < ... < k_{n-m}`, are the free
//! coordinates. Coordinates are flattened row-major: `(alpha, s)` sits at
//! index `alpha * (n - m) + s`.

mod chart;
mod metric;

pub use chart::{
    chart_transition, coordinate_index, restricted_jacobian_determinant, transition_jacobian, unstable_basis,
};
pub use metric::{euclidean_partials, gradient, gradient_structured, metric_inverse, metric_matrix};

use nalgebra::DMatrix;

use crate::combinatorics::CriticalPoint;
use crate::error::{Error, Result};

/// The weights `0 < l_1 < ... < l_n` defining the Morse function.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParameters("spectrum must be non-empty".into()));
        }
        if lambdas.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "spectrum entries must be finite and positive, got {lambdas:?}"
            )));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameters(format!(
                "spectrum must be strictly increasing, got {lambdas:?}"
            )));
        }
        Ok(Spectrum { lambdas })
    }

    /// `l_i = i`.
    pub fn standard(n: usize) -> Self {
        Spectrum {
            lambdas: (1..=n).map(|i| i as f64).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `l_label^2` for a 1-based label.
    pub fn squared(&self, label: usize) -> f64 {
        let l = self.lambdas[label - 1];
        l * l
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::InvalidParameters(format!(
                "spectrum has {} entries but the Grassmannian has n = {n}",
                self.n()
            )));
        }
        Ok(())
    }
}

/// A point in the chart named by `chart`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    chart: CriticalPoint,
    coords: DMatrix<f64>,
}

impl ChartPoint {
    pub fn new(chart: CriticalPoint, coords: DMatrix<f64>) -> Result<Self> {
        let (m, k) = (chart.m(), chart.n() - chart.m());
        if coords.shape() != (m, k) {
            return Err(Error::InvalidParameters(format!(
                "chart {chart} needs {m}x{k} coordinates, got {}x{}",
                coords.nrows(),
                coords.ncols()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("coordinates must be finite".into()));
        }
        Ok(ChartPoint { chart, coords })
    }

    pub fn origin(chart: CriticalPoint) -> Self {
        let coords = DMatrix::zeros(chart.m(), chart.n() - chart.m());
        ChartPoint { chart, coords }
    }

    pub fn chart(&self) -> &CriticalPoint {
        &self.chart
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn m(&self) -> usize {
        self.chart.m()
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// Coordinates flattened row-major.
    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.transpose().iter().copied().collect()
    }

    pub fn from_vec(chart: CriticalPoint, v: &[f64]) -> Result<Self> {
        let (m, k) = (chart.m(), chart.n() - chart.m());
        if v.len() != m * k {
            return Err(Error::InvalidParameters(format!(
                "expected {} coordinates, got {}",
                m * k,
                v.len()
            )));
        }
        Self::new(chart, DMatrix::from_row_slice(m, k, v))
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.amax()
    }

    /// The `m x n` matrix with the identity in the chart columns.
    pub fn implied_matrix(&self) -> DMatrix<f64> {
        let (m, n) = (self.m(), self.n());
        let mut x = DMatrix::zeros(m, n);
        for (t, &i) in self.chart.subset().iter().enumerate() {
            x[(t, i - 1)] = 1.0;
        }
        for (s, k) in self.chart.complement().into_iter().enumerate() {
            x.column_mut(k - 1).copy_from(&self.coords.column(s));
        }
        x
    }
}

/// `X X^T`, the Gram matrix of the rows.
pub(crate) fn row_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x * x.transpose()
}

/// `X L^{-2} X^T`.
pub(crate) fn scaled_row_gram(x: &DMatrix<f64>, s: &Spectrum) -> DMatrix<f64> {
    let mut scaled = x.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= s.lambdas[j];
    }
    &scaled * scaled.transpose()
}

/// Cofactor matrix `A_{ij} = (-1)^{i+j} det(M without row i, column j)`.
pub(crate) fn cofactors(mat: &DMatrix<f64>) -> DMatrix<f64> {
    let m = mat.nrows();
    if m == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(m, m, |i, j| {
        let minor = mat.clone().remove_row(i).remove_column(j);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// `f` evaluated on any full-rank `m x n` matrix representing the plane.
pub fn morse_value_of_matrix(x: &DMatrix<f64>, s: &Spectrum) -> Result<f64> {
    s.check(x.ncols())?;
    Ok(row_gram(x).determinant() / scaled_row_gram(x, s).determinant())
}

/// `f = det(X X^T) / det(X L^{-2} X^T)`.
pub fn morse_value(p: &ChartPoint, s: &Spectrum) -> Result<f64> {
    morse_value_of_matrix(&p.implied_matrix(), s)
}

/// `f(O_I) = prod_t l_{i_t}^2`.
pub fn critical_value(p0: &CriticalPoint, s: &Spectrum) -> Result<f64> {
    s.check(p0.n())?;
    Ok(p0.subset().iter().map(|&i| s.squared(i)).product())
}

/// Diagonal of the Hessian at the chart origin, row-major over
/// `(slot t, complement position s)`:
/// `2 prod l_{i}^2 * (1 - l_{i_t}^2 / l_{k_s}^2)`.
pub fn hessian_at_critical(p0: &CriticalPoint, s: &Spectrum) -> Result<Vec<f64>> {
    let scale = 2.0 * critical_value(p0, s)?;
    let comp = p0.complement();
    let mut out = Vec::with_capacity(p0.m() * comp.len());
    for &i in p0.subset() {
        for &k in &comp {
            out.push(scale * (1.0 - s.squared(i) / s.squared(k)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(n: usize, s: &[usize]) -> CriticalPoint {
        CriticalPoint::new(n, s.to_vec()).unwrap()
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![1.0, 2.0, 3.0]).is_ok());
        assert!(Spectrum::new(vec![1.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![2.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![]).is_err());
        assert!(Spectrum::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn chart_point_validation() {
        assert!(ChartPoint::new(cp(4, &[1, 3]), DMatrix::zeros(2, 3)).is_err());
        assert!(ChartPoint::new(cp(4, &[1, 3]), DMatrix::from_element(2, 2, f64::INFINITY)).is_err());
        let p = ChartPoint::from_vec(cp(4, &[1, 3]), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.to_vec(), vec![1.0, 2.0, 3.0, 4.0]);
        let x = p.implied_matrix();
        // complement labels are 2 and 4
        assert_eq!(x.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 0.0, 2.0]);
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 3.0, 1.0, 4.0]);
    }

    #[test]
    fn values_at_origins() {
        let s = Spectrum::standard(5);
        for p in crate::enumerate_critical_points(5, 2).unwrap() {
            let f = morse_value(&ChartPoint::origin(p.clone()), &s).unwrap();
            let expected: f64 = p.subset().iter().map(|&i| (i * i) as f64).product();
            assert!((f - expected).abs() < 1e-12 * expected);
        }
        let f = morse_value(&ChartPoint::origin(cp(2, &[1])), &Spectrum::standard(2)).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        assert!(morse_value(&ChartPoint::origin(cp(3, &[1])), &Spectrum::standard(2)).is_err());
    }

    #[test]
    fn hessian_example() {
        let h = hessian_at_critical(&cp(4, &[1, 3]), &Spectrum::standard(4)).unwrap();
        let expected = [13.5, 16.875, -22.5, 7.875];
        for (a, b) in h.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{h:?}");
        }
    }

    #[test]
    fn negative_hessian_entries_count_the_index() {
        let s = Spectrum::standard(7);
        for p in crate::enumerate_critical_points(7, 3).unwrap() {
            let h = hessian_at_critical(&p, &s).unwrap();
            assert!(h.iter().all(|v| *v != 0.0));
            assert_eq!(h.iter().filter(|v| **v < 0.0).count(), p.morse_index());
        }
    }
}
