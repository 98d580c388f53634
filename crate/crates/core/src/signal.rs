//! Beamformed response synthesis for point-scatterer scenes.
//!
//! All phases are expressed in normalized angular frequency (NAF), so the
//! carrier wavelength never appears: an element at index offset `x` seen
//! from NAF `f` contributes the phase `2 pi f x`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NafPoint;

/// One uniform linear array.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlaConfig {
    pub n_elements: usize,
    pub spacing_over_lambda: f64,
    /// Per-element complex beamforming coefficients, element 0 first.
    pub weights: Vec<Complex64>,
}

#[derive(Deserialize)]
struct UlaConfigRepr {
    #[serde(default = "default_elements")]
    n_elements: usize,
    #[serde(default = "default_spacing")]
    spacing_over_lambda: f64,
    #[serde(default)]
    weights: Option<Vec<Complex64>>,
}

fn default_elements() -> usize {
    11
}

fn default_spacing() -> f64 {
    0.5
}

impl<'de> Deserialize<'de> for UlaConfig {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = UlaConfigRepr::deserialize(de)?;
        let cfg = match repr.weights {
            Some(w) => UlaConfig::with_weights(repr.spacing_over_lambda, w),
            None => UlaConfig::with_spacing(repr.n_elements, repr.spacing_over_lambda),
        }
        .map_err(serde::de::Error::custom)?;
        if cfg.n_elements != repr.n_elements {
            return Err(serde::de::Error::custom(format!(
                "n_elements = {} but {} weights given",
                repr.n_elements, cfg.n_elements
            )));
        }
        Ok(cfg)
    }
}

impl Default for UlaConfig {
    fn default() -> Self {
        Self::uniform(11).expect("11 elements is valid")
    }
}

impl UlaConfig {
    /// Half-wavelength array with uniform unit-norm weights.
    pub fn uniform(n_elements: usize) -> Result<Self> {
        Self::with_spacing(n_elements, 0.5)
    }

    pub fn with_spacing(n_elements: usize, spacing_over_lambda: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidArray("array needs at least one element".into()));
        }
        let w = Complex64::new(1.0 / (n_elements as f64).sqrt(), 0.0);
        Self::with_weights(spacing_over_lambda, vec![w; n_elements])
    }

    pub fn with_weights(spacing_over_lambda: f64, weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArray("array needs at least one element".into()));
        }
        if !(spacing_over_lambda.is_finite() && spacing_over_lambda > 0.0) {
            return Err(Error::InvalidArray(format!(
                "spacing d/lambda must be positive, got {spacing_over_lambda}"
            )));
        }
        if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidArray("weights must be finite".into()));
        }
        Ok(Self {
            n_elements: weights.len(),
            spacing_over_lambda,
            weights,
        })
    }

    /// Centered element position of element `n`, in units of the spacing.
    #[inline]
    pub fn element_offset(&self, n: usize) -> f64 {
        n as f64 - (self.n_elements as f64 - 1.0) / 2.0
    }

    /// Weighted array response to a NAF mismatch `delta_f` (scan minus source).
    pub fn response(&self, delta_f: f64) -> Complex64 {
        array_factor(self, delta_f)
    }

    /// Array responses for every scan NAF against one source NAF.
    pub fn response_vector(&self, scan: &[f64], source: f64) -> Vec<Complex64> {
        scan.iter().map(|&f| array_factor(self, f - source)).collect()
    }
}

/// `sin(N pi f) / (N sin(pi f))`, with the limit value `+-1` at integers.
pub fn dirichlet(n: usize, f: f64) -> f64 {
    let nf = n as f64;
    let den = (PI * f).sin();
    if den.abs() < 1e-12 {
        // Limit at f = m: (-1)^(m (N-1)).
        let m = f.round() as i64;
        if (m * (n as i64 - 1)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    } else {
        (nf * PI * f).sin() / (nf * den)
    }
}

/// `sum_n w_n exp(-j 2 pi delta_f (n - (N-1)/2))`.
pub fn array_factor(array: &UlaConfig, delta_f: f64) -> Complex64 {
    array
        .weights
        .iter()
        .enumerate()
        .map(|(n, &w)| w * Complex64::from_polar(1.0, -2.0 * PI * delta_f * array.element_offset(n)))
        .sum()
}

/// An ideal point scatterer described by its TX/RX NAF pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub naf: NafPoint,
    pub amplitude: Complex64,
}

impl Scatterer {
    pub fn new(naf: NafPoint, amplitude: Complex64) -> Self {
        Self { naf, amplitude }
    }

    pub fn unit(naf: NafPoint) -> Self {
        Self::new(naf, Complex64::new(1.0, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Self {
        Self { scatterers }
    }
}

/// Complex map over a (TX NAF, RX NAF) grid, indexed `[tx][rx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    f_tx_grid: Vec<f64>,
    f_rx_grid: Vec<f64>,
    values: Array2<Complex64>,
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

impl ResponseMap {
    pub fn new(f_tx_grid: Vec<f64>, f_rx_grid: Vec<f64>, values: Array2<Complex64>) -> Result<Self> {
        check_grid("TX", &f_tx_grid)?;
        check_grid("RX", &f_rx_grid)?;
        if values.dim() != (f_tx_grid.len(), f_rx_grid.len()) {
            return Err(Error::InvalidGrid(format!(
                "values are {:?} but grids are {}x{}",
                values.dim(),
                f_tx_grid.len(),
                f_rx_grid.len()
            )));
        }
        Ok(Self {
            f_tx_grid,
            f_rx_grid,
            values,
        })
    }

    pub fn zeros(f_tx_grid: Vec<f64>, f_rx_grid: Vec<f64>) -> Result<Self> {
        let dim = (f_tx_grid.len(), f_rx_grid.len());
        Self::new(f_tx_grid, f_rx_grid, Array2::zeros(dim))
    }

    pub fn f_tx_grid(&self) -> &[f64] {
        &self.f_tx_grid
    }

    pub fn f_rx_grid(&self) -> &[f64] {
        &self.f_rx_grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// `|value|^2` per cell.
    pub fn power(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Largest cellwise `|a - b|` relative to `max |reference|`.
    pub fn relative_max_error(&self, reference: &ResponseMap) -> Result<f64> {
        if self.dim() != reference.dim() {
            return Err(Error::InvalidGrid("map shapes differ".into()));
        }
        let num = self
            .values
            .iter()
            .zip(reference.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        Ok(num / reference.max_abs())
    }
}

/// Variance and seed of additive circular complex Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Linear noise power per beamformed sample.
    pub variance: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            variance: 10.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self { variance: 0.0, seed: 0 }
    }

    pub fn from_db(power_db: f64, seed: u64) -> Self {
        Self {
            variance: 10f64.powf(power_db / 10.0),
            seed,
        }
    }
}

/// Beamformed response of the scene at one (TX NAF, RX NAF) scan point.
pub fn response_at(tx: &UlaConfig, rx: &UlaConfig, scene: &Scene, point: NafPoint) -> Complex64 {
    scene
        .scatterers
        .iter()
        .map(|s| {
            s.amplitude
                * array_factor(tx, point.f_tx - s.naf.f_tx)
                * array_factor(rx, point.f_rx - s.naf.f_rx)
        })
        .sum()
}

/// Response over the Cartesian product of two NAF grids, accumulated as one
/// rank-1 outer product per scatterer.
pub fn synthesize_map(
    tx: &UlaConfig,
    rx: &UlaConfig,
    scene: &Scene,
    f_tx_grid: &[f64],
    f_rx_grid: &[f64],
) -> Result<ResponseMap> {
    let mut map = ResponseMap::zeros(f_tx_grid.to_vec(), f_rx_grid.to_vec())?;
    for s in &scene.scatterers {
        let u = tx.response_vector(f_tx_grid, s.naf.f_tx);
        let v: Vec<Complex64> = rx
            .response_vector(f_rx_grid, s.naf.f_rx)
            .into_iter()
            .map(|x| x * s.amplitude)
            .collect();
        for (mut row, ui) in map.values.rows_mut().into_iter().zip(&u) {
            for (cell, vj) in row.iter_mut().zip(&v) {
                *cell += ui * vj;
            }
        }
    }
    Ok(map)
}

/// Adds noise drawn from an explicit generator, cells in row-major order.
pub fn add_noise_with_rng<R: rand::Rng + ?Sized>(map: &mut ResponseMap, variance: f64, rng: &mut R) -> Result<()> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise variance must be >= 0, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite positive std");
    for cell in map.values.iter_mut() {
        let re = normal.sample(rng);
        let im = normal.sample(rng);
        *cell += Complex64::new(re, im);
    }
    Ok(())
}

/// Independent circular complex Gaussian noise on every cell, deterministic
/// in `cfg.seed`.
pub fn add_noise(map: &ResponseMap, cfg: &NoiseConfig) -> Result<ResponseMap> {
    let mut out = map.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    add_noise_with_rng(&mut out, cfg.variance, &mut rng)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn brute_af(weights: &[Complex64], delta_f: f64) -> Complex64 {
        let n = weights.len() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, w) in weights.iter().enumerate() {
            let x = i as f64 - (n - 1.0) / 2.0;
            let ph = -2.0 * PI * delta_f * x;
            acc += w * Complex64::new(ph.cos(), ph.sin());
        }
        acc
    }

    #[test]
    fn array_factor_examples() {
        let a = UlaConfig::uniform(11).unwrap();
        assert_abs_diff_eq!(array_factor(&a, 0.0).re, 11f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(array_factor(&a, 1.0 / 11.0).norm(), 0.0, epsilon = 1e-12);
        let half = array_factor(&a, 0.5);
        let oracle = brute_af(&a.weights, 0.5);
        assert_abs_diff_eq!(oracle.re, -1.0 / 11f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(half.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(half.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_limits() {
        assert_eq!(dirichlet(11, 0.0), 1.0);
        assert_eq!(dirichlet(11, 1.0), 1.0);
        assert_eq!(dirichlet(4, 1.0), -1.0);
        assert_abs_diff_eq!(dirichlet(11, 1e-13), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dirichlet(11, 0.5), -1.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_array_factor_is_scaled_dirichlet() {
        for n in [1usize, 2, 4, 7, 11] {
            let a = UlaConfig::uniform(n).unwrap();
            for k in 0..50 {
                let f = -1.3 + k as f64 * 0.0517;
                let af = array_factor(&a, f);
                assert_abs_diff_eq!(af.re, (n as f64).sqrt() * dirichlet(n, f), epsilon = 1e-12);
                assert_abs_diff_eq!(af.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn response_at_examples() {
        let a = UlaConfig::uniform(11).unwrap();
        let origin = NafPoint::new(0.0, 0.0);
        let scene = Scene::new(vec![Scatterer::unit(origin)]);
        let r = response_at(&a, &a, &scene, origin);
        assert_abs_diff_eq!(r.re, 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.norm_sqr(), 121.0, epsilon = 1e-9);
        assert_abs_diff_eq!(response_at(&a, &a, &scene, NafPoint::new(1.0 / 11.0, 0.0)).norm(), 0.0, epsilon = 1e-12);

        let cancel = Scene::new(vec![
            Scatterer::unit(NafPoint::new(0.1, -0.2)),
            Scatterer::new(NafPoint::new(0.1, -0.2), Complex64::from_polar(1.0, PI)),
        ]);
        assert_abs_diff_eq!(response_at(&a, &a, &cancel, NafPoint::new(0.1, -0.2)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn synthesize_map_matches_pointwise_response() {
        let tx = UlaConfig::uniform(11).unwrap();
        let rx = UlaConfig::uniform(7).unwrap();
        let scene = Scene::new(vec![
            Scatterer::new(NafPoint::new(-0.05, -0.35), Complex64::new(0.3, 0.8)),
            Scatterer::unit(NafPoint::new(0.2, -0.1)),
        ]);
        let gt: Vec<f64> = (0..13).map(|i| -0.5 + i as f64 / 13.0).collect();
        let gr: Vec<f64> = (0..9).map(|i| -0.4 + i as f64 / 10.0).collect();
        let map = synthesize_map(&tx, &rx, &scene, &gt, &gr).unwrap();
        for (i, &ft) in gt.iter().enumerate() {
            for (j, &fr) in gr.iter().enumerate() {
                let d = map.values()[[i, j]] - response_at(&tx, &rx, &scene, NafPoint::new(ft, fr));
                assert!(d.norm() < 1e-12);
            }
        }
        assert!(synthesize_map(&tx, &rx, &scene, &[], &gr).is_err());
    }

    #[test]
    fn real_scatterer_at_origin_gives_real_map() {
        let a = UlaConfig::uniform(11).unwrap();
        let scene = Scene::new(vec![Scatterer::new(NafPoint::new(0.0, 0.0), Complex64::new(-0.7, 0.0))]);
        let g: Vec<f64> = (0..40).map(|i| -0.5 + i as f64 / 40.0).collect();
        let map = synthesize_map(&a, &a, &scene, &g, &g).unwrap();
        assert!(map.values().iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn noise_examples() {
        let g: Vec<f64> = (0..11).map(|i| -5.0 / 11.0 + i as f64 / 11.0).collect();
        let zeros = ResponseMap::zeros(g.clone(), g.clone()).unwrap();

        let same = add_noise(&zeros, &NoiseConfig::noiseless()).unwrap();
        assert_eq!(same, zeros);

        let cfg = NoiseConfig { variance: 10.0, seed: 7 };
        let a = add_noise(&zeros, &cfg).unwrap();
        let b = add_noise(&zeros, &cfg).unwrap();
        assert_eq!(a, b);

        // 121 cells, 2 * 121 degrees of freedom: the 99% interval of the
        // mean power is 10 * chi2(242) / 242 in about [8.4, 11.8]; we use
        // the documented +-1.0 band over many seeds.
        let mut inside = 0;
        for seed in 0..200 {
            let m = add_noise(&zeros, &NoiseConfig { variance: 10.0, seed }).unwrap();
            let mean = m.power().mean().unwrap();
            if (mean - 10.0).abs() <= 1.0 {
                inside += 1;
            }
        }
        // P(|mean - 10| <= 1) for chi2(242)/24.2 is ~0.79.
        assert!((140..=190).contains(&inside), "inside = {inside}");

        assert!(add_noise(&zeros, &NoiseConfig { variance: -1.0, seed: 0 }).is_err());
    }

    #[test]
    fn noise_pooled_power_matches_variance() {
        let g: Vec<f64> = (0..100).map(|i| -0.5 + i as f64 / 100.0).collect();
        let zeros = ResponseMap::zeros(g.clone(), g).unwrap();
        let m = add_noise(&zeros, &NoiseConfig { variance: 10.0, seed: 3 }).unwrap();
        let mean = m.power().mean().unwrap();
        // 1e4 exponential cells: std of mean = 10 / 100.
        assert!((mean - 10.0).abs() < 0.4, "mean = {mean}");
        let mean_re: f64 = m.values().iter().map(|v| v.re).sum::<f64>() / 1e4;
        assert!(mean_re.abs() < 0.15);
    }

    #[test]
    fn ula_config_from_json() {
        let a: UlaConfig = serde_json::from_str(r#"{"n_elements": 5}"#).unwrap();
        assert_eq!(a, UlaConfig::with_spacing(5, 0.5).unwrap());
        let b: UlaConfig = serde_json::from_str(r#"{"n_elements": 2, "weights": [[1.0, 0.0], [0.0, 1.0]]}"#).unwrap();
        assert_eq!(b.weights[1], Complex64::new(0.0, 1.0));
        assert!(serde_json::from_str::<UlaConfig>(r#"{"n_elements": 3, "weights": [[1.0, 0.0]]}"#).is_err());
        assert!(serde_json::from_str::<UlaConfig>(r#"{"n_elements": 0}"#).is_err());
    }

    fn weights_strategy(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
    }

    proptest! {
        // The double sum over both apertures factors into the product of
        // the single-array sums.
        #[test]
        fn joint_phase_term_separates(nt in 1usize..14, nr in 1usize..14, ft in -0.5f64..0.5, fr in -0.5f64..0.5) {
            let mut joint = Complex64::new(0.0, 0.0);
            for n in 0..nt {
                for m in 0..nr {
                    let xn = n as f64 - (nt as f64 - 1.0) / 2.0;
                    let xm = m as f64 - (nr as f64 - 1.0) / 2.0;
                    joint += Complex64::from_polar(1.0, -2.0 * PI * (ft * xn + fr * xm));
                }
            }
            let ones = |k| UlaConfig::with_weights(0.5, vec![Complex64::new(1.0, 0.0); k]).unwrap();
            let prod = array_factor(&ones(nt), ft) * array_factor(&ones(nr), fr);
            prop_assert!((joint - prod).norm() <= 1e-10 * joint.norm().max(1.0));
        }

        #[test]
        fn weighted_array_factor_matches_brute_sum(w in weights_strategy(9), f in -2.0f64..2.0) {
            let a = UlaConfig::with_weights(0.5, w.clone()).unwrap();
            prop_assert!((array_factor(&a, f) - brute_af(&w, f)).norm() < 1e-12);
        }

        #[test]
        fn array_factor_has_unit_period(w in weights_strategy(6), f in -0.5f64..0.5) {
            // Even N has half-integer offsets: period 1 up to the sign (-1)^(N-1).
            let a = UlaConfig::with_weights(0.5, w).unwrap();
            let d = array_factor(&a, f + 1.0) + array_factor(&a, f);
            prop_assert!(d.norm() < 1e-11);
        }
    }
}
