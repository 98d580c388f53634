//! Angular sampling sets and their Cartesian-product scan grids.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{naf_from_angle, AngleRad};
use crate::signal::{add_noise, check_grid, synthesize_map, NoiseConfig, ResponseMap, Scene, UlaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingDomain {
    Naf,
    Radian,
}

/// Sorted set of scan coordinates for one array.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSet {
    domain: SamplingDomain,
    points: Vec<f64>,
}

impl SamplingSet {
    pub fn new(domain: SamplingDomain, points: Vec<f64>) -> Result<Self> {
        check_grid("sampling", &points)?;
        if domain == SamplingDomain::Radian && points.iter().any(|p| p.abs() > FRAC_PI_2) {
            return Err(Error::InvalidGrid("radian samples must lie in [-pi/2, pi/2]".into()));
        }
        Ok(Self { domain, points })
    }

    pub fn domain(&self) -> SamplingDomain {
        self.domain
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The scan coordinates expressed as NAF values for `array`.
    pub fn to_naf(&self, array: &UlaConfig) -> Result<Vec<f64>> {
        match self.domain {
            SamplingDomain::Naf => Ok(self.points.clone()),
            SamplingDomain::Radian => self
                .points
                .iter()
                .map(|&t| Ok(naf_from_angle(AngleRad::new(t)?, array.spacing_over_lambda)))
                .collect(),
        }
    }
}

/// `N` NAF samples spaced `1/N`, symmetric about zero.
///
/// Odd `N` lands on `k/N`; even `N` is offset by half a bin so the set stays
/// symmetric.
pub fn dft_naf_samples(array: &UlaConfig) -> SamplingSet {
    let n = array.n_elements as f64;
    let points = (0..array.n_elements).map(|k| (k as f64 - (n - 1.0) / 2.0) / n).collect();
    SamplingSet {
        domain: SamplingDomain::Naf,
        points,
    }
}

/// `N` angles uniformly spaced over `[-pi/2, pi/2]`, endpoints included.
pub fn radian_uniform_samples(array: &UlaConfig) -> Result<SamplingSet> {
    let n = array.n_elements;
    if n < 2 {
        return Err(Error::InvalidArray(format!(
            "radian-uniform sampling needs at least 2 elements, got {n}"
        )));
    }
    let span = (n - 1) as f64;
    let points = (0..n)
        .map(|k| (2.0 * k as f64 - span) / span * FRAC_PI_2)
        .collect();
    Ok(SamplingSet {
        domain: SamplingDomain::Radian,
        points,
    })
}

/// `M` uniform NAF points `-0.5 + m/M` covering one period.
pub fn uniform_naf_grid(m: usize) -> Vec<f64> {
    (0..m).map(|i| -0.5 + i as f64 / m as f64).collect()
}

/// The product grid `tx_set x rx_set`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    tx_set: SamplingSet,
    rx_set: SamplingSet,
}

impl SamplingGrid {
    pub fn tx_set(&self) -> &SamplingSet {
        &self.tx_set
    }

    pub fn rx_set(&self) -> &SamplingSet {
        &self.rx_set
    }

    pub fn domain(&self) -> SamplingDomain {
        self.tx_set.domain
    }

    /// Number of TX-RX dwells needed to scan the grid.
    pub fn dwell_count(&self) -> usize {
        self.tx_set.len() * self.rx_set.len()
    }

    /// The optimal DFT grid for a TX/RX pair.
    pub fn optimal(tx: &UlaConfig, rx: &UlaConfig) -> Self {
        Self {
            tx_set: dft_naf_samples(tx),
            rx_set: dft_naf_samples(rx),
        }
    }

    pub fn radian_uniform(tx: &UlaConfig, rx: &UlaConfig) -> Result<Self> {
        Ok(Self {
            tx_set: radian_uniform_samples(tx)?,
            rx_set: radian_uniform_samples(rx)?,
        })
    }
}

pub fn build_grid(tx_set: SamplingSet, rx_set: SamplingSet) -> Result<SamplingGrid> {
    if tx_set.domain != rx_set.domain {
        return Err(Error::DomainMismatch(format!(
            "TX set is {:?} but RX set is {:?}",
            tx_set.domain, rx_set.domain
        )));
    }
    Ok(SamplingGrid { tx_set, rx_set })
}

/// Scans every grid pair once and adds measurement noise.
///
/// The returned map is indexed by the NAF of each scan direction, so radian
/// grids come back on their (non-uniform) NAF images.
pub fn acquire(
    grid: &SamplingGrid,
    tx: &UlaConfig,
    rx: &UlaConfig,
    scene: &Scene,
    noise: &NoiseConfig,
) -> Result<ResponseMap> {
    let ft = grid.tx_set.to_naf(tx)?;
    let fr = grid.rx_set.to_naf(rx)?;
    let map = synthesize_map(tx, rx, scene, &ft, &fr)?;
    if noise.variance == 0.0 {
        return Ok(map);
    }
    add_noise(&map, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NafPoint;
    use crate::signal::Scatterer;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn dft_samples_examples() {
        let s = dft_naf_samples(&UlaConfig::uniform(11).unwrap());
        assert_eq!(s.len(), 11);
        assert_eq!(s.points()[0], -5.0 / 11.0);
        assert_eq!(s.points()[5], 0.0);
        assert_eq!(s.points()[10], 5.0 / 11.0);
        assert_abs_diff_eq!(s.points()[0], -0.454545, epsilon = 1e-6);

        assert_eq!(dft_naf_samples(&UlaConfig::uniform(1).unwrap()).points(), &[0.0]);
        assert_eq!(
            dft_naf_samples(&UlaConfig::uniform(4).unwrap()).points(),
            &[-0.375, -0.125, 0.125, 0.375]
        );
    }

    #[test]
    fn dft_samples_are_symmetric_with_bin_spacing() {
        for n in 1..30 {
            let s = dft_naf_samples(&UlaConfig::uniform(n).unwrap());
            let p = s.points();
            for w in p.windows(2) {
                assert_abs_diff_eq!(w[1] - w[0], 1.0 / n as f64, epsilon = 1e-15);
            }
            for (a, b) in p.iter().zip(p.iter().rev()) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn radian_samples_examples() {
        let s = radian_uniform_samples(&UlaConfig::uniform(11).unwrap()).unwrap();
        assert_eq!(s.points()[0], -PI / 2.0);
        assert_eq!(s.points()[10], PI / 2.0);
        for w in s.points().windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], PI / 10.0, epsilon = 1e-15);
        }
        let s = radian_uniform_samples(&UlaConfig::uniform(3).unwrap()).unwrap();
        assert_eq!(s.points(), &[-PI / 2.0, 0.0, PI / 2.0]);
        assert!(radian_uniform_samples(&UlaConfig::uniform(1).unwrap()).is_err());
    }

    #[test]
    fn grid_domains_must_match() {
        let a = UlaConfig::uniform(11).unwrap();
        let err = build_grid(dft_naf_samples(&a), radian_uniform_samples(&a).unwrap());
        assert!(matches!(err, Err(Error::DomainMismatch(_))));
        let g = build_grid(dft_naf_samples(&a), dft_naf_samples(&a)).unwrap();
        assert_eq!(g.dwell_count(), 121);
    }

    #[test]
    fn noiseless_acquire_is_synthesis() {
        let a = UlaConfig::uniform(11).unwrap();
        let scene = Scene::new(vec![Scatterer::unit(NafPoint::new(-0.05, -0.35))]);
        let grid = SamplingGrid::optimal(&a, &a);
        let acq = acquire(&grid, &a, &a, &scene, &NoiseConfig::noiseless()).unwrap();
        let p = grid.tx_set().points();
        assert_eq!(acq, synthesize_map(&a, &a, &scene, p, p).unwrap());
        assert_eq!(acq.dim(), (11, 11));

        let rad = SamplingGrid::radian_uniform(&a, &a).unwrap();
        let acq = acquire(&rad, &a, &a, &scene, &NoiseConfig::noiseless()).unwrap();
        assert_eq!(acq.f_tx_grid()[0], -0.5);
        assert_eq!(acq.f_tx_grid()[10], 0.5);
    }

    #[test]
    fn reference_grid_is_half_open_period() {
        let g = uniform_naf_grid(220);
        assert_eq!(g.len(), 220);
        assert_eq!(g[0], -0.5);
        assert_abs_diff_eq!(g[219], 0.5 - 1.0 / 220.0, epsilon = 1e-15);
    }
}
