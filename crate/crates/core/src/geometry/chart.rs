//! Changes of chart: `Y = M^{-1} X`, where `M` is the minor of the implied
//! matrix in the target chart's columns.

use nalgebra::DMatrix;

use super::ChartPoint;
use crate::combinatorics::CriticalPoint;
use crate::error::{Error, Result};

/// Flat row-major index of the free coordinate `x_{alpha, label}` in
/// `chart` (`alpha` 1-based), or `None` if `label` is a chart column.
pub fn coordinate_index(chart: &CriticalPoint, alpha: usize, label: usize) -> Option<usize> {
    if alpha == 0 || alpha > chart.m() {
        return None;
    }
    let comp = chart.complement();
    let s = comp.binary_search(&label).ok()?;
    Some((alpha - 1) * comp.len() + s)
}

/// The coordinates `x_{alpha, j}` with `j < i_alpha` not a chart label, in
/// row-major order. These span the negative eigenspace of the Hessian at the
/// origin, and this order fixes the reference orientation of the point.
pub fn unstable_basis(p0: &CriticalPoint) -> Vec<(usize, usize)> {
    let comp = p0.complement();
    p0.subset()
        .iter()
        .enumerate()
        .flat_map(|(t, &i)| comp.iter().filter(move |&&j| j < i).map(move |&j| (t + 1, j)))
        .collect()
}

fn target_minor(p: &ChartPoint, target: &CriticalPoint) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if target.n() != p.n() || target.m() != p.m() {
        return Err(Error::InvalidParameters(format!(
            "target chart {target} does not belong to G_{{{},{}}}",
            p.n(),
            p.m()
        )));
    }
    let x = p.implied_matrix();
    let cols: Vec<usize> = target.subset().iter().map(|i| i - 1).collect();
    let minor = x.select_columns(&cols);
    let scale: f64 = minor.row_iter().map(|r| r.norm()).product();
    let det = minor.determinant();
    // negated so that a NaN determinant is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::PointOutsideChart(target.clone()));
    }
    let inv = minor
        .try_inverse()
        .ok_or_else(|| Error::PointOutsideChart(target.clone()))?;
    Ok((x, inv))
}

pub fn chart_transition(p: &ChartPoint, target: &CriticalPoint) -> Result<ChartPoint> {
    let (x, inv) = target_minor(p, target)?;
    let y = inv * x;
    let cols: Vec<usize> = target.complement().iter().map(|k| k - 1).collect();
    ChartPoint::new(target.clone(), y.select_columns(&cols))
}

/// Jacobian of the coordinate change at `p`, rows indexed by target
/// coordinates and columns by source coordinates. From
/// `dY = M^{-1} (dX - dM Y)` with `dM` the target-column part of `dX`.
pub fn transition_jacobian(p: &ChartPoint, target: &CriticalPoint) -> Result<DMatrix<f64>> {
    let (x, inv) = target_minor(p, target)?;
    let y = &inv * &x;
    let (m, n) = (p.m(), p.n());
    let src_comp = p.chart().complement();
    let tgt_labels = target.subset();
    let tgt_comp = target.complement();
    let dim = m * (n - m);

    let mut jac = DMatrix::zeros(dim, dim);
    for alpha in 0..m {
        for (s, &label) in src_comp.iter().enumerate() {
            // dX = e_alpha e_label^T
            let mut dx = DMatrix::zeros(m, n);
            dx[(alpha, label - 1)] = 1.0;
            if let Ok(pos) = tgt_labels.binary_search(&label) {
                let mut dm = DMatrix::zeros(m, m);
                dm[(alpha, pos)] = 1.0;
                dx -= dm * &y;
            }
            let dy = &inv * dx;
            let col = alpha * src_comp.len() + s;
            for beta in 0..m {
                for (u, &k) in tgt_comp.iter().enumerate() {
                    jac[(beta * tgt_comp.len() + u, col)] = dy[(beta, k - 1)];
                }
            }
        }
    }
    Ok(jac)
}

/// Determinant of the Jacobian block mapping the ordered source directions
/// `from` to the ordered target directions `to`, each given as
/// `(alpha, label)` pairs. Its sign compares the two orientations.
pub fn restricted_jacobian_determinant(
    p: &ChartPoint,
    target: &CriticalPoint,
    from: &[(usize, usize)],
    to: &[(usize, usize)],
) -> Result<f64> {
    if from.len() != to.len() {
        return Err(Error::InvalidParameters(format!(
            "restricted Jacobian needs square blocks, got {} -> {}",
            from.len(),
            to.len()
        )));
    }
    let lookup = |chart: &CriticalPoint, dirs: &[(usize, usize)]| -> Result<Vec<usize>> {
        dirs.iter()
            .map(|&(a, l)| {
                coordinate_index(chart, a, l)
                    .ok_or_else(|| Error::InvalidParameters(format!("x_{{{a},{l}}} is not a coordinate of {chart}")))
            })
            .collect()
    };
    let cols = lookup(p.chart(), from)?;
    let rows = lookup(target, to)?;
    let jac = transition_jacobian(p, target)?;
    Ok(jac.select_rows(&rows).select_columns(&cols).determinant())
}
