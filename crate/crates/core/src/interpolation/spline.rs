use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::angle_from_naf;
use crate::signal::{check_grid, ResponseMap};

use super::{AxisOperator, SeparableInterpolator};

const MIN_KNOTS: usize = 4;

/// Interpolating cubic spline with not-a-knot end conditions.
///
/// Evaluation outside the knot hull continues the first/last cubic piece.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivative at each knot.
    curvature: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(knots: &[f64], values: &[f64]) -> Result<Self> {
        check_grid("spline knot", knots)?;
        let n = knots.len();
        if n < MIN_KNOTS {
            return Err(Error::SampleCount {
                expected: MIN_KNOTS,
                got: n,
            });
        }
        if values.len() != n {
            return Err(Error::SampleCount {
                expected: n,
                got: values.len(),
            });
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];

        // Continuous third derivative across the second and second-to-last knots.
        a[0][0] = h[1];
        a[0][1] = -(h[0] + h[1]);
        a[0][2] = h[0];
        a[n - 1][n - 3] = h[n - 2];
        a[n - 1][n - 2] = -(h[n - 3] + h[n - 2]);
        a[n - 1][n - 1] = h[n - 3];
        for i in 1..n - 1 {
            a[i][i - 1] = h[i - 1];
            a[i][i] = 2.0 * (h[i - 1] + h[i]);
            a[i][i + 1] = h[i];
            rhs[i] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        let curvature = solve_dense(a, rhs)?;
        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            curvature,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        // Piece index, clamped so out-of-hull points use the end polynomials.
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let h = x1 - x0;
        let a = x1 - t;
        let b = t - x0;
        m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a + (y1 / h - m1 * h / 6.0) * b
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::InvalidGrid("singular spline system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (done, rest) = a.split_at_mut(col + 1);
        let pivot_row = &done[col];
        for (offset, r) in rest.iter_mut().enumerate() {
            let factor = r[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (x, &p) in r[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// Spline weights for `targets` over `knots`, built from the cardinal
/// splines (one per unit sample vector).
pub fn spline_axis_operator(knots: &[f64], targets: &[f64]) -> Result<AxisOperator> {
    let n = knots.len();
    let mut w = Array2::zeros((targets.len(), n));
    let mut unit = vec![0.0; n];
    for k in 0..n {
        unit[k] = 1.0;
        let s = CubicSpline::not_a_knot(knots, &unit)?;
        unit[k] = 0.0;
        for (m, &t) in targets.iter().enumerate() {
            w[[m, k]] = s.eval(t);
        }
    }
    Ok(AxisOperator::new(w))
}

/// Spline over angle knots evaluated at the angles of NAF targets.
///
/// `naf_knots` are the NAF images of the radian samples.
pub(super) fn radian_axis_operator(naf_knots: &[f64], naf_targets: &[f64], spacing_over_lambda: f64) -> Result<AxisOperator> {
    let to_angle = |f: f64| -> Result<f64> {
        // Knots sit on +-d/lambda up to rounding; clamp those before arcsin.
        let ratio = f / spacing_over_lambda;
        if ratio.abs() > 1.0 && ratio.abs() <= 1.0 + 1e-12 {
            return Ok(ratio.signum() * std::f64::consts::FRAC_PI_2);
        }
        Ok(angle_from_naf(f, spacing_over_lambda)?.value())
    };
    let knots: Vec<f64> = naf_knots.iter().map(|&f| to_angle(f)).collect::<Result<_>>()?;
    let targets: Vec<f64> = naf_targets
        .iter()
        .map(|&f| angle_from_naf(f, spacing_over_lambda).map(|a| a.value()))
        .collect::<Result<_>>()?;
    spline_axis_operator(&knots, &targets)
}

/// Separable not-a-knot spline on the real and imaginary parts, TX axis
/// first.
pub fn spline_interpolate_2d(map: &ResponseMap, out_tx: &[f64], out_rx: &[f64]) -> Result<ResponseMap> {
    let interp = SeparableInterpolator::new(
        spline_axis_operator(map.f_tx_grid(), out_tx)?,
        spline_axis_operator(map.f_rx_grid(), out_rx)?,
    );
    interp.apply(map, out_tx, out_rx)
}

/// Spline in the radian domain for a map acquired on radian-uniform scan
/// angles, evaluated at the angles `arcsin(f / (d/lambda))` of the output
/// NAF grids.
pub fn rad_spline_pipeline(
    map: &ResponseMap,
    out_tx: &[f64],
    out_rx: &[f64],
    spacing_tx: f64,
    spacing_rx: f64,
) -> Result<ResponseMap> {
    let interp = SeparableInterpolator::new(
        radian_axis_operator(map.f_tx_grid(), out_tx, spacing_tx)?,
        radian_axis_operator(map.f_rx_grid(), out_rx, spacing_rx)?,
    );
    interp.apply(map, out_tx, out_rx)
}
