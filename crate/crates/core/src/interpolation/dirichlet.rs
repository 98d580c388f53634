use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sampling::{uniform_naf_grid, SamplingDomain, SamplingSet};
use crate::signal::{dirichlet, ResponseMap};

use super::{AxisOperator, SeparableInterpolator};

#[inline]
fn dft_point(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    (k as f64 - (nf - 1.0) / 2.0) / nf
}

pub(super) fn check_dft_grid(grid: &[f64]) -> Result<()> {
    let n = grid.len();
    let ok = grid
        .iter()
        .enumerate()
        .all(|(k, &f)| (f - dft_point(n, k)).abs() <= 1e-12);
    if n == 0 || !ok {
        return Err(Error::InvalidGrid(format!(
            "DFT interpolation needs the {n}-point DFT NAF grid as input"
        )));
    }
    Ok(())
}

/// Kernel matrix `K[m, k] = D_N(target_m - f_k)` over the `N`-point DFT grid.
pub fn dirichlet_axis_operator(n: usize, targets: &[f64]) -> AxisOperator {
    let mut w = Array2::zeros((targets.len(), n));
    for (m, &t) in targets.iter().enumerate() {
        for k in 0..n {
            w[[m, k]] = dirichlet(n, t - dft_point(n, k));
        }
    }
    AxisOperator::new(w)
}

/// `out(f) = sum_k samples[k] D_N(f - f_k)` for samples on the DFT NAF grid.
///
/// Exact for any centered trigonometric polynomial with `N` terms, which is
/// what an `N`-element ULA sees in NAF.
pub fn dirichlet_interpolate_1d(
    sampling: &SamplingSet,
    samples: &[Complex64],
    targets: &[f64],
) -> Result<Vec<Complex64>> {
    if sampling.domain() != SamplingDomain::Naf {
        return Err(Error::DomainMismatch("Dirichlet interpolation needs NAF samples".into()));
    }
    if samples.len() != sampling.len() {
        return Err(Error::SampleCount {
            expected: sampling.len(),
            got: samples.len(),
        });
    }
    check_dft_grid(sampling.points())?;
    Ok(dirichlet_axis_operator(samples.len(), targets).apply(samples))
}

/// Separable Dirichlet upsampling of a map acquired on the optimal grid.
pub fn dft_upsample_2d(map: &ResponseMap, out_tx: &[f64], out_rx: &[f64]) -> Result<ResponseMap> {
    check_dft_grid(map.f_tx_grid())?;
    check_dft_grid(map.f_rx_grid())?;
    let interp = SeparableInterpolator::new(
        dirichlet_axis_operator(map.f_tx_grid().len(), out_tx),
        dirichlet_axis_operator(map.f_rx_grid().len(), out_rx),
    );
    interp.apply(map, out_tx, out_rx)
}

/// Zero-padding FFT route onto the uniform `-0.5 + m/M` grids.
///
/// The samples are first turned into the `N` element-domain coefficients
/// `c_n`, which are zero-padded to `M` and transformed back. Works for any
/// `M >= N`, odd or even `N`.
pub fn dft_upsample_2d_fft(map: &ResponseMap, m_tx: usize, m_rx: usize) -> Result<ResponseMap> {
    check_dft_grid(map.f_tx_grid())?;
    check_dft_grid(map.f_rx_grid())?;
    let (n_tx, n_rx) = map.dim();
    if m_tx < n_tx || m_rx < n_rx {
        return Err(Error::InvalidGrid(format!(
            "output size {m_tx}x{m_rx} is smaller than the input {n_tx}x{n_rx}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let tx_axis = FftAxis::new(&mut planner, n_tx, m_tx);
    let rx_axis = FftAxis::new(&mut planner, n_rx, m_rx);

    let values = map.values();
    let mut partial = Array2::<Complex64>::zeros((m_tx, n_rx));
    for j in 0..n_rx {
        let col: Vec<Complex64> = values.column(j).to_vec();
        for (i, v) in tx_axis.upsample(&col).into_iter().enumerate() {
            partial[[i, j]] = v;
        }
    }
    let mut out = Array2::<Complex64>::zeros((m_tx, m_rx));
    for i in 0..m_tx {
        let row: Vec<Complex64> = partial.row(i).to_vec();
        for (j, v) in rx_axis.upsample(&row).into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    ResponseMap::new(uniform_naf_grid(m_tx), uniform_naf_grid(m_rx), out)
}

struct FftAxis {
    n: usize,
    m: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl FftAxis {
    fn new(planner: &mut FftPlanner<f64>, n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            fft: planner.plan_fft_forward(m),
        }
    }

    fn upsample(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let nf = self.n as f64;
        let x0 = -(nf - 1.0) / 2.0;
        // a(f) = sum_n c_n exp(-j 2 pi f (n + x0))
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for (n, slot) in buf.iter_mut().take(self.n).enumerate() {
            let x = n as f64 + x0;
            let c: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, &a)| a * Complex64::from_polar(1.0, 2.0 * PI * dft_point(self.n, k) * x))
                .sum::<Complex64>()
                / nf;
            // Evaluating at -0.5 + m/M: the -0.5 offset contributes exp(j pi n).
            *slot = if n % 2 == 0 { c } else { -c };
        }
        self.fft.process(&mut buf);
        let mf = self.m as f64;
        buf.iter()
            .enumerate()
            .map(|(m, &v)| {
                let g = -0.5 + m as f64 / mf;
                v * Complex64::from_polar(1.0, -2.0 * PI * g * x0)
            })
            .collect()
    }
}
