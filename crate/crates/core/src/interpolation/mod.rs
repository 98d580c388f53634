//! Reconstruction of the full 2D NAF response from a sampled grid.
//!
//! Every method here is linear in the samples and acts on each axis
//! independently, so each one reduces to a pair of real [`AxisOperator`]s
//! applied as `A * S * B^T`.

mod dirichlet;
mod spline;

use std::fmt;
use std::str::FromStr;

use std::cell::RefCell;

use ndarray::linalg::general_mat_mul;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ResponseMap;

pub use dirichlet::{
    dft_upsample_2d, dft_upsample_2d_fft, dirichlet_axis_operator, dirichlet_interpolate_1d,
};
pub use spline::{rad_spline_pipeline, spline_axis_operator, spline_interpolate_2d, CubicSpline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterpolationMethod {
    #[serde(rename = "dft")]
    DirichletDft,
    #[serde(rename = "naf-spline")]
    NafSpline,
    #[serde(rename = "rad-spline")]
    RadSpline,
}

impl InterpolationMethod {
    pub const ALL: [InterpolationMethod; 3] = [Self::DirichletDft, Self::NafSpline, Self::RadSpline];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DirichletDft => "dft",
            Self::NafSpline => "naf-spline",
            Self::RadSpline => "rad-spline",
        }
    }

    /// Stable position in [`Self::ALL`].
    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn sampling_domain(self) -> crate::sampling::SamplingDomain {
        match self {
            Self::DirichletDft | Self::NafSpline => crate::sampling::SamplingDomain::Naf,
            Self::RadSpline => crate::sampling::SamplingDomain::Radian,
        }
    }
}

impl fmt::Display for InterpolationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterpolationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dft" => Ok(Self::DirichletDft),
            "naf-spline" => Ok(Self::NafSpline),
            "rad-spline" => Ok(Self::RadSpline),
            other => Err(Error::InvalidConfig(format!("unknown interpolation method '{other}'"))),
        }
    }
}

/// Real `out x in` matrix mapping samples on one axis to targets.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisOperator {
    weights: Array2<f64>,
}

impl AxisOperator {
    pub fn new(weights: Array2<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }

    pub fn apply(&self, samples: &[Complex64]) -> Vec<Complex64> {
        self.weights
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(samples).map(|(&w, &s)| s * w).sum())
            .collect()
    }
}

thread_local! {
    static SCRATCH: RefCell<(Array2<f64>, Array2<f64>)> = RefCell::new((Array2::zeros((0, 0)), Array2::zeros((0, 0))));
}

/// A pair of axis operators applied as `tx * S * rx^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableInterpolator {
    tx: AxisOperator,
    rx: AxisOperator,
}

impl SeparableInterpolator {
    pub fn new(tx: AxisOperator, rx: AxisOperator) -> Self {
        Self { tx, rx }
    }

    pub fn tx(&self) -> &AxisOperator {
        &self.tx
    }

    pub fn rx(&self) -> &AxisOperator {
        &self.rx
    }

    pub fn out_dim(&self) -> (usize, usize) {
        (self.tx.n_out(), self.rx.n_out())
    }

    /// Applies the TX operator first, then the RX operator.
    pub fn apply_values(&self, samples: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let (n_tx, n_rx) = samples.dim();
        if n_tx != self.tx.n_in() || n_rx != self.rx.n_in() {
            return Err(Error::SampleCount {
                expected: self.tx.n_in() * self.rx.n_in(),
                got: n_tx * n_rx,
            });
        }
        let cols = self.rx.n_out();
        let mut out = Array2::zeros((self.tx.n_out(), cols));
        self.apply_into(samples, |i, re, im| {
            for (j, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = Complex64::new(re[j], im[j]);
            }
        });
        Ok(out)
    }

    /// Applies the RX operator first, then the TX operator.
    pub fn apply_values_rx_first(&self, samples: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let (n_tx, n_rx) = samples.dim();
        if n_tx != self.tx.n_in() || n_rx != self.rx.n_in() {
            return Err(Error::SampleCount {
                expected: self.tx.n_in() * self.rx.n_in(),
                got: n_tx * n_rx,
            });
        }
        let mut partial = Array2::<Complex64>::zeros((n_tx, self.rx.n_out()));
        for k in 0..n_tx {
            let r = self.rx.apply(&samples.row(k).to_vec());
            partial.row_mut(k).assign(&ndarray::Array1::from(r));
        }
        let mut out = Array2::zeros((self.tx.n_out(), self.rx.n_out()));
        for j in 0..self.rx.n_out() {
            let col: Vec<Complex64> = partial.column(j).to_vec();
            for (i, v) in self.tx.apply(&col).into_iter().enumerate() {
                out[[i, j]] = v;
            }
        }
        Ok(out)
    }

    /// Power `|value|^2` of the interpolated map, written row-major into `out`.
    pub fn apply_power_into(&self, samples: &Array2<Complex64>, out: &mut [f64]) -> Result<()> {
        let (n_tx, n_rx) = samples.dim();
        if n_tx != self.tx.n_in() || n_rx != self.rx.n_in() {
            return Err(Error::SampleCount {
                expected: self.tx.n_in() * self.rx.n_in(),
                got: n_tx * n_rx,
            });
        }
        if out.len() != self.tx.n_out() * self.rx.n_out() {
            return Err(Error::InvalidGrid("power buffer has the wrong size".into()));
        }
        let cols = self.rx.n_out();
        self.apply_into(samples, |i, re, im| {
            for ((o, &a), &b) in out[i * cols..(i + 1) * cols].iter_mut().zip(re).zip(im) {
                *o = a * a + b * b;
            }
        });
        Ok(())
    }

    /// Calls `sink(i, re, im)` with the real and imaginary parts of output
    /// row `i`.
    fn apply_into<F: FnMut(usize, &[f64], &[f64])>(&self, samples: &Array2<Complex64>, mut sink: F) {
        let n_out_tx = self.tx.n_out();
        let n_in_rx = self.rx.n_in();
        let n_out_rx = self.rx.n_out();
        SCRATCH.with_borrow_mut(|(stage, full)| {
            // Stage one, stacked as [re; im] so stage two is a single real GEMM.
            if stage.dim() != (2 * n_out_tx, n_in_rx) {
                *stage = Array2::zeros((2 * n_out_tx, n_in_rx));
            } else {
                stage.fill(0.0);
            }
            if full.dim() != (2 * n_out_tx, n_out_rx) {
                *full = Array2::zeros((2 * n_out_tx, n_out_rx));
            }
            for (i, tx_row) in self.tx.weights.rows().into_iter().enumerate() {
                for (&a, s_row) in tx_row.iter().zip(samples.rows()) {
                    if a == 0.0 {
                        continue;
                    }
                    for (k, &s) in s_row.iter().enumerate() {
                        stage[[i, k]] += s.re * a;
                        stage[[n_out_tx + i, k]] += s.im * a;
                    }
                }
            }
            general_mat_mul(1.0, &*stage, &self.rx.weights.t(), 0.0, full);
            for i in 0..n_out_tx {
                let re = full.row(i);
                let im = full.row(n_out_tx + i);
                sink(i, re.as_slice().expect("standard layout"), im.as_slice().expect("standard layout"));
            }
        });
    }

    pub fn apply(&self, map: &ResponseMap, out_tx: &[f64], out_rx: &[f64]) -> Result<ResponseMap> {
        let values = self.apply_values(map.values())?;
        ResponseMap::new(out_tx.to_vec(), out_rx.to_vec(), values)
    }
}

/// Builds the interpolator for `method` from the grids of an acquired map.
///
/// `spacing_tx`/`spacing_rx` (d/lambda) are only consulted by the RAD
/// spline, whose knots live in the radian domain.
pub fn build_interpolator(
    method: InterpolationMethod,
    in_tx: &[f64],
    in_rx: &[f64],
    out_tx: &[f64],
    out_rx: &[f64],
    spacing_tx: f64,
    spacing_rx: f64,
) -> Result<SeparableInterpolator> {
    let (tx, rx) = match method {
        InterpolationMethod::DirichletDft => {
            dirichlet::check_dft_grid(in_tx)?;
            dirichlet::check_dft_grid(in_rx)?;
            (
                dirichlet_axis_operator(in_tx.len(), out_tx),
                dirichlet_axis_operator(in_rx.len(), out_rx),
            )
        }
        InterpolationMethod::NafSpline => (spline_axis_operator(in_tx, out_tx)?, spline_axis_operator(in_rx, out_rx)?),
        InterpolationMethod::RadSpline => (
            spline::radian_axis_operator(in_tx, out_tx, spacing_tx)?,
            spline::radian_axis_operator(in_rx, out_rx, spacing_rx)?,
        ),
    };
    Ok(SeparableInterpolator::new(tx, rx))
}

/// Reconstructs `map` onto `out_tx x out_rx` with the given method.
pub fn reconstruct(
    method: InterpolationMethod,
    map: &ResponseMap,
    out_tx: &[f64],
    out_rx: &[f64],
    spacing_tx: f64,
    spacing_rx: f64,
) -> Result<ResponseMap> {
    match method {
        InterpolationMethod::DirichletDft => dft_upsample_2d(map, out_tx, out_rx),
        InterpolationMethod::NafSpline => spline_interpolate_2d(map, out_tx, out_rx),
        InterpolationMethod::RadSpline => rad_spline_pipeline(map, out_tx, out_rx, spacing_tx, spacing_rx),
    }
}
