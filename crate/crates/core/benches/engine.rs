//! Demodulation and density scan on one thread versus the whole pool.
//! Built without `parallel`, only the sequential path is measured.

use std::hint::black_box;

use amfm_core::detect::highest_dot_density_area;
use amfm_core::gabor::build_filterbank;
use amfm_core::phantom::Chirp;
use amfm_core::pipeline::am_fm_images;
use amfm_core::{BinaryImage, GrayImage, Plane};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn frame(w: usize, h: usize) -> GrayImage {
    let chirp = Chirp {
        u0: 0.8,
        v0: 0.3,
        sweep: 0.5 / w as f64,
        amplitude: 60.0,
        am_depth: 0.4,
    };
    chirp.render(w, h).map(|p| p + 128.0)
}

fn mask(w: usize, h: usize) -> BinaryImage {
    Plane::from_fn(w, h, |x, y| (x * 7919 + y * 104_729) % 10 < 3)
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut counts = vec![1];
    if n > 1 {
        counts.push(n);
    }
    counts
        .into_iter()
        .map(|t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            (format!("{t}-threads"), pool)
        })
        .collect()
}

fn bench_demodulation(c: &mut Criterion) {
    let bank = build_filterbank();
    let img = frame(320, 240);
    let mut g = c.benchmark_group("demodulation_320x240");
    g.sample_size(10);
    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| am_fm_images(black_box(&img), &bank).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| am_fm_images(black_box(&img), &bank).unwrap())
    });
    g.finish();
}

fn bench_density(c: &mut Criterion) {
    let m = mask(640, 480);
    let mut g = c.benchmark_group("density_scan_640x480_s200");
    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| highest_dot_density_area(black_box(&m), 200).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| highest_dot_density_area(black_box(&m), 200).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_demodulation, bench_density);
criterion_main!(benches);
