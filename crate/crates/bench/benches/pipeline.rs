use std::hint::black_box;

use bistatic_naf::{
    dft_upsample_2d, dft_upsample_2d_fft, evaluate_iteration, extract_peaks, reconstruct, uniform_naf_grid,
    CfarConfig, CfarDetector, InterpolationMethod, NafPoint,
};
use bistatic_naf_bench::{interpolator, noisy_samples, OUT_SIZE};
use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;

fn upsampling(c: &mut Criterion) {
    let fine = uniform_naf_grid(OUT_SIZE);
    let samples = noisy_samples(InterpolationMethod::DirichletDft, 1);
    let mut g = c.benchmark_group("upsample_220");
    g.bench_function("dft_kernel", |b| b.iter(|| dft_upsample_2d(black_box(&samples), &fine, &fine).unwrap()));
    g.bench_function("dft_fft", |b| b.iter(|| dft_upsample_2d_fft(black_box(&samples), OUT_SIZE, OUT_SIZE).unwrap()));
    g.bench_function("naf_spline", |b| {
        b.iter(|| reconstruct(InterpolationMethod::NafSpline, black_box(&samples), &fine, &fine, 0.5, 0.5).unwrap())
    });
    for method in InterpolationMethod::ALL {
        let op = interpolator(method);
        let s = noisy_samples(method, 1);
        let mut power = vec![0.0; OUT_SIZE * OUT_SIZE];
        g.bench_function(format!("operator_power/{method}"), |b| {
            b.iter(|| op.apply_power_into(black_box(s.values()), &mut power).unwrap())
        });
    }
    g.finish();
}

fn cfar(c: &mut Criterion) {
    let map = dft_upsample_2d_fft(&noisy_samples(InterpolationMethod::DirichletDft, 2), OUT_SIZE, OUT_SIZE).unwrap();
    let power = map.power();
    let mut det = CfarDetector::new(CfarConfig::default()).unwrap();
    let mut mask = Array2::from_elem(power.dim(), false);
    c.bench_function("ca_cfar_220", |b| b.iter(|| det.detect_into(black_box(power.view()), &mut mask).unwrap()));
    det.detect_into(power.view(), &mut mask).unwrap();
    let grid = uniform_naf_grid(OUT_SIZE);
    c.bench_function("extract_peaks_220", |b| {
        b.iter(|| extract_peaks(black_box(power.view()), mask.view(), &grid, &grid).unwrap())
    });
}

fn iteration(c: &mut Criterion) {
    let grid = uniform_naf_grid(OUT_SIZE);
    let truths = [NafPoint::new(-0.05, -0.35), NafPoint::new(0.2, -0.1)];
    let mut g = c.benchmark_group("iteration");
    for method in InterpolationMethod::ALL {
        let op = interpolator(method);
        let mut det = CfarDetector::new(CfarConfig::default()).unwrap();
        let mut power = Array2::zeros((OUT_SIZE, OUT_SIZE));
        let mut mask = Array2::from_elem((OUT_SIZE, OUT_SIZE), false);
        let mut seed = 0;
        g.bench_function(method.as_str(), |b| {
            b.iter(|| {
                seed += 1;
                let s = noisy_samples(method, seed);
                op.apply_power_into(s.values(), power.as_slice_mut().unwrap()).unwrap();
                det.detect_into(power.view(), &mut mask).unwrap();
                let dets = extract_peaks(power.view(), mask.view(), &grid, &grid).unwrap();
                evaluate_iteration(&dets, &truths, 1.0 / 11.0, 1.0 / 11.0)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, upsampling, cfar, iteration);
criterion_main!(benches);
