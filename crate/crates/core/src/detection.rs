//! 2D cell-averaging CFAR, peak clustering, detection/target matching and
//! the aggregate detection metrics.
//!
//! The NAF plane is periodic under Dirichlet reconstruction, so both the
//! CFAR training window and the peak clustering wrap around the map edges.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NafPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarConfig {
    pub desired_pfa: f64,
    /// Half width of the square guard window, excluding the cell under test.
    pub guard_half_width: usize,
    /// Half width of the outer training window.
    pub train_half_width: usize,
}

impl CfarConfig {
    pub fn new(desired_pfa: f64, guard_half_width: usize, train_half_width: usize) -> Result<Self> {
        let cfg = Self {
            desired_pfa,
            guard_half_width,
            train_half_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Guard covering one mainlobe (`ceil(M/N)` cells) and a training ring
    /// half as wide again.
    pub fn for_upsampling(desired_pfa: f64, out_size: usize, n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidConfig("array needs elements".into()));
        }
        let guard = out_size.div_ceil(n_elements);
        let train = guard + out_size.div_ceil(2 * n_elements);
        Self::new(desired_pfa, guard, train)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.desired_pfa > 0.0 && self.desired_pfa < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "desired P_FA must be in (0, 1), got {}",
                self.desired_pfa
            )));
        }
        if self.train_half_width <= self.guard_half_width {
            return Err(Error::InvalidConfig(format!(
                "train half width {} must exceed guard half width {}",
                self.train_half_width, self.guard_half_width
            )));
        }
        Ok(())
    }

    pub fn training_cells(&self) -> usize {
        let outer = 2 * self.train_half_width + 1;
        let inner = 2 * self.guard_half_width + 1;
        outer * outer - inner * inner
    }

    /// `N (P_FA^(-1/N) - 1)`: exact for exponential noise with `N`
    /// independent training cells.
    pub fn threshold_factor(&self) -> f64 {
        let n = self.training_cells() as f64;
        n * ((-self.desired_pfa.ln() / n).exp_m1())
    }
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            desired_pfa: 1e-3,
            guard_half_width: 20,
            train_half_width: 30,
        }
    }
}

/// Reusable CA-CFAR with its summed-area scratch buffer.
#[derive(Debug, Clone)]
pub struct CfarDetector {
    cfg: CfarConfig,
    alpha: f64,
    sat: Vec<f64>,
}

impl CfarDetector {
    pub fn new(cfg: CfarConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            alpha: cfg.threshold_factor(),
            cfg,
            sat: Vec::new(),
        })
    }

    pub fn config(&self) -> &CfarConfig {
        &self.cfg
    }

    /// Writes the detection mask for `power` into `mask` (same shape).
    pub fn detect_into(&mut self, power: ArrayView2<'_, f64>, mask: &mut Array2<bool>) -> Result<()> {
        let (rows, cols) = power.dim();
        let window = 2 * self.cfg.train_half_width + 1;
        if rows <= window || cols <= window {
            return Err(Error::InvalidConfig(format!(
                "CFAR window of {window} cells does not fit a {rows}x{cols} map"
            )));
        }
        if mask.dim() != (rows, cols) {
            return Err(Error::InvalidGrid("mask and power map shapes differ".into()));
        }
        let t = self.cfg.train_half_width;
        let g = self.cfg.guard_half_width;

        // Summed-area table of the periodically extended map: extended index
        // e maps back to (e - t) mod size, and entry (r, c) sums extended
        // rows < r and cols < c.
        let er = rows + 2 * t;
        let ec = cols + 2 * t;
        let stride = ec + 1;
        self.sat.clear();
        self.sat.resize((er + 1) * stride, 0.0);
        let src_cols: Vec<usize> = (0..ec).map(|c| (c + cols - t) % cols).collect();
        for r in 0..er {
            let src_r = (r + rows - t) % rows;
            let row = power.row(src_r);
            let (done, rest) = self.sat.split_at_mut((r + 1) * stride);
            let prev = &done[r * stride + 1..];
            let cur = &mut rest[1..stride];
            let mut run = 0.0;
            for ((out, &above), &sc) in cur.iter_mut().zip(prev).zip(&src_cols) {
                run += row[sc];
                *out = above + run;
            }
        }

        let n_train = self.cfg.training_cells() as f64;
        let scale = self.alpha / n_train;
        let sat_row = |r: usize| &self.sat[r * stride..(r + 1) * stride];
        for (i, (p_row, mut m_row)) in power.rows().into_iter().zip(mask.rows_mut()).enumerate() {
            // Extended coordinates of cell i are i + t.
            let (o0, o1) = (sat_row(i), sat_row(i + 2 * t + 1));
            let (g0, g1) = (sat_row(i + t - g), sat_row(i + t + g + 1));
            for (j, (&p, m)) in p_row.iter().zip(m_row.iter_mut()).enumerate() {
                let (a, b) = (j, j + 2 * t + 1);
                let (c, d) = (j + t - g, j + t + g + 1);
                let outer = o1[b] - o0[b] - o1[a] + o0[a];
                let inner = g1[d] - g0[d] - g1[c] + g0[c];
                *m = p > scale * (outer - inner);
            }
        }
        Ok(())
    }
}

/// Flags cells whose power exceeds `alpha` times the mean over the square
/// training annulus, with periodic indexing.
pub fn ca_cfar_2d(power: ArrayView2<'_, f64>, cfg: &CfarConfig) -> Result<Array2<bool>> {
    let mut det = CfarDetector::new(*cfg)?;
    let mut mask = Array2::from_elem(power.dim(), false);
    det.detect_into(power, &mut mask)?;
    Ok(mask)
}

/// Peak of one cluster of flagged cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub naf: NafPoint,
    pub power: f64,
    /// `(tx, rx)` grid index of the peak cell.
    pub cell: (usize, usize),
}

fn by_power_then_cell(a: &Detection, b: &Detection) -> Ordering {
    b.power.total_cmp(&a.power).then(a.cell.cmp(&b.cell))
}

/// Groups flagged cells into 8-connected components (wrapping at the map
/// edges) and reports each component's strongest cell, strongest first.
pub fn extract_peaks(
    power: ArrayView2<'_, f64>,
    mask: ArrayView2<'_, bool>,
    f_tx_grid: &[f64],
    f_rx_grid: &[f64],
) -> Result<Vec<Detection>> {
    let (rows, cols) = power.dim();
    if mask.dim() != (rows, cols) {
        return Err(Error::InvalidGrid("mask and power map shapes differ".into()));
    }
    if f_tx_grid.len() != rows || f_rx_grid.len() != cols {
        return Err(Error::InvalidGrid("grid lengths do not match the power map".into()));
    }
    let mut seen = Array2::from_elem((rows, cols), false);
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for i0 in 0..rows {
        for j0 in 0..cols {
            if !mask[[i0, j0]] || seen[[i0, j0]] {
                continue;
            }
            seen[[i0, j0]] = true;
            stack.push((i0, j0));
            let mut best = (i0, j0);
            while let Some((i, j)) = stack.pop() {
                let p = power[[i, j]];
                let bp = power[best];
                if p > bp || (p == bp && (i, j) < best) {
                    best = (i, j);
                }
                for di in [rows - 1, 0, 1] {
                    for dj in [cols - 1, 0, 1] {
                        let ni = (i + di) % rows;
                        let nj = (j + dj) % cols;
                        if mask[[ni, nj]] && !seen[[ni, nj]] {
                            seen[[ni, nj]] = true;
                            stack.push((ni, nj));
                        }
                    }
                }
            }
            out.push(Detection {
                naf: NafPoint::new(f_tx_grid[best.0], f_rx_grid[best.1]),
                power: power[best],
                cell: best,
            });
        }
    }
    out.sort_by(by_power_then_cell);
    Ok(out)
}

/// Outcome of assigning detections to true targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// For each truth, the index of the detection that claimed it.
    pub claimed_by: Vec<Option<usize>>,
    pub false_alarms: usize,
}

impl MatchResult {
    pub fn hits(&self) -> usize {
        self.claimed_by.iter().filter(|c| c.is_some()).count()
    }

    pub fn misses(&self) -> usize {
        self.claimed_by.len() - self.hits()
    }
}

/// Greedy matching in descending detection power. A detection claims the
/// nearest unclaimed truth inside its `tol_tx x tol_rx` box; detections
/// that claim nothing are false alarms.
pub fn match_detections(dets: &[Detection], truths: &[NafPoint], tol_tx: f64, tol_rx: f64) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| by_power_then_cell(&dets[a], &dets[b]));
    let mut claimed_by = vec![None; truths.len()];
    let mut false_alarms = 0;
    for d in order {
        let det = &dets[d];
        let candidate = truths
            .iter()
            .enumerate()
            .filter(|(k, t)| {
                claimed_by[*k].is_none()
                    && (det.naf.f_tx - t.f_tx).abs() <= tol_tx
                    && (det.naf.f_rx - t.f_rx).abs() <= tol_rx
            })
            .min_by(|(_, a), (_, b)| {
                // Exact distance ties fall back to coordinates so the result
                // does not depend on truth order.
                det.naf
                    .distance(a)
                    .total_cmp(&det.naf.distance(b))
                    .then(a.f_tx.total_cmp(&b.f_tx))
                    .then(a.f_rx.total_cmp(&b.f_rx))
            })
            .map(|(k, _)| k);
        match candidate {
            Some(k) => claimed_by[k] = Some(d),
            None => false_alarms += 1,
        }
    }
    MatchResult {
        claimed_by,
        false_alarms,
    }
}

/// Per-iteration tallies feeding [`compute_metrics`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationOutcome {
    pub n_truths: usize,
    pub n_missed: usize,
    pub n_false_alarms: usize,
    /// Sum over truths of the squared NAF distance to the closest detection.
    pub sq_err_sum: f64,
    pub n_rmse_included: usize,
    pub n_rmse_excluded: usize,
}

/// Matches one iteration's detections and records its error terms.
pub fn evaluate_iteration(dets: &[Detection], truths: &[NafPoint], tol_tx: f64, tol_rx: f64) -> IterationOutcome {
    let m = match_detections(dets, truths, tol_tx, tol_rx);
    let mut out = IterationOutcome {
        n_truths: truths.len(),
        n_missed: m.misses(),
        n_false_alarms: m.false_alarms,
        ..Default::default()
    };
    for t in truths {
        let closest = dets
            .iter()
            .map(|d| {
                let dt = d.naf.f_tx - t.f_tx;
                let dr = d.naf.f_rx - t.f_rx;
                dt * dt + dr * dr
            })
            .min_by(f64::total_cmp);
        match closest {
            Some(sq) => {
                out.sq_err_sum += sq;
                out.n_rmse_included += 1;
            }
            None => out.n_rmse_excluded += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub p_md: f64,
    /// False alarms per iteration.
    pub r_fa: f64,
    /// NaN when no truth had any detection to measure against.
    pub rmse_naf: f64,
    pub n_iterations: usize,
    pub n_truths: usize,
    pub n_missed: usize,
    pub n_false_alarms: usize,
    pub n_rmse_excluded: usize,
}

impl Metrics {
    /// Binomial standard error of `p_md`.
    pub fn p_md_std_error(&self) -> f64 {
        if self.n_truths == 0 {
            return 0.0;
        }
        (self.p_md * (1.0 - self.p_md) / self.n_truths as f64).sqrt()
    }
}

/// Aggregates per-iteration outcomes, summing in slice order.
pub fn compute_metrics(outcomes: &[IterationOutcome]) -> Result<Metrics> {
    if outcomes.is_empty() {
        return Err(Error::InvalidConfig("metrics need at least one iteration".into()));
    }
    let mut n_truths = 0;
    let mut n_missed = 0;
    let mut n_fa = 0;
    let mut sq = 0.0;
    let mut included = 0;
    let mut excluded = 0;
    for o in outcomes {
        n_truths += o.n_truths;
        n_missed += o.n_missed;
        n_fa += o.n_false_alarms;
        sq += o.sq_err_sum;
        included += o.n_rmse_included;
        excluded += o.n_rmse_excluded;
    }
    Ok(Metrics {
        p_md: if n_truths == 0 { 0.0 } else { n_missed as f64 / n_truths as f64 },
        r_fa: n_fa as f64 / outcomes.len() as f64,
        rmse_naf: if included == 0 { f64::NAN } else { (sq / included as f64).sqrt() },
        n_iterations: outcomes.len(),
        n_truths,
        n_missed,
        n_false_alarms: n_fa,
        n_rmse_excluded: excluded,
    })
}
