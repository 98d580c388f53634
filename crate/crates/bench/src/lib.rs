//! Fixtures shared by the benchmarks.

use bistatic_naf::{
    acquire, build_interpolator, uniform_naf_grid, InterpolationMethod, NafPoint, NoiseConfig, ResponseMap,
    SamplingGrid, Scatterer, Scene, SeparableInterpolator, UlaConfig,
};

pub const OUT_SIZE: usize = 220;

pub fn two_target_scene() -> Scene {
    Scene::new(vec![
        Scatterer::unit(NafPoint::new(-0.05, -0.35)),
        Scatterer::unit(NafPoint::new(0.2, -0.1)),
    ])
}

pub fn sampling_grid(method: InterpolationMethod, ula: &UlaConfig) -> SamplingGrid {
    match method {
        InterpolationMethod::RadSpline => SamplingGrid::radian_uniform(ula, ula).expect("valid array"),
        _ => SamplingGrid::optimal(ula, ula),
    }
}

/// Noisy acquisition of [`two_target_scene`] with the default arrays.
pub fn noisy_samples(method: InterpolationMethod, seed: u64) -> ResponseMap {
    let ula = UlaConfig::default();
    let noise = NoiseConfig { variance: 10.0, seed };
    acquire(&sampling_grid(method, &ula), &ula, &ula, &two_target_scene(), &noise).expect("valid scene")
}

/// Interpolator from the method's sampling grid onto the `OUT_SIZE` grid.
pub fn interpolator(method: InterpolationMethod) -> SeparableInterpolator {
    let samples = noisy_samples(method, 0);
    let fine = uniform_naf_grid(OUT_SIZE);
    build_interpolator(method, samples.f_tx_grid(), samples.f_rx_grid(), &fine, &fine, 0.5, 0.5)
        .expect("valid grids")
}
