//! Self-checks on synthetic inputs with known answers. Each check reports a
//! measured value against a fixed tolerance and its wall time; the CLI `bench`
//! command and the acceptance tests both run them.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amfm::{analytic_image, Demodulator};
use crate::attention::Direction;
use crate::detect::{
    extract_blocks, highest_dot_density_area, DetectionKind, IntegralImage, KnnModel, Label,
};
use crate::gabor::{build_filterbank, Filterbank, GaborFilter, GAMMA};
use crate::image::{BBox, GrayImage, Plane, RgbImage};
use crate::phantom::{bin_align, face_phantom, head_phantom, paint_box, plane_wave, Chirp, FaceLayout, SKIN};
use crate::pipeline::{am_fm_images, analyze_frame, FrameReport, PipelineConfig};
use crate::skin::skin_mask;
use crate::{color, Result};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub measured: String,
    pub tolerance: String,
    pub pass: bool,
    pub elapsed: Duration,
    /// Per-item detail lines, printed under the summary.
    pub details: Vec<String>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}. {}: {} (tolerance {}) in {:.3} s",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// Bank layout: 54 filters in groups of 24/20/8/2, `gamma = 0.5`, `F = L`,
/// `theta` in radians and centres inside `[-pi, pi]^2`.
pub fn check_filterbank() -> CheckResult {
    let (bank, elapsed) = timed(build_filterbank);
    let mut sizes = [0usize; 4];
    let mut worst = 0.0f64;
    let mut inside = true;
    for f in bank.filters() {
        if f.scale_group < 4 {
            sizes[f.scale_group] += 1;
        }
        worst = worst
            .max((f.gamma - GAMMA).abs())
            .max((f.frequency - f.radial).abs())
            .max((f.theta - f.angle_deg * PI / 180.0).abs());
        inside &= f.u.abs() <= PI && f.v.abs() <= PI;
    }
    let secs = elapsed.as_secs_f64();
    CheckResult {
        id: 1,
        name: "filterbank",
        measured: format!(
            "{} filters, groups {:?}, max parameter error {worst:.1e}, centres inside: {inside}",
            bank.len(),
            sizes
        ),
        tolerance: "54, [24, 20, 8, 2], 1e-12, true, < 1 s".into(),
        pass: bank.len() == 54 && sizes == [24, 20, 8, 2] && worst <= 1e-12 && inside && secs < 1.0,
        elapsed,
        details: Vec::new(),
    }
}

/// Level, relative to each filter's own peak, at which the responses of two
/// same-angle filters are equal on the ray through both centres.
pub fn overlap_level(a: &GaborFilter, b: &GaborFilter) -> f64 {
    let (ca, sa) = (a.theta.cos(), a.theta.sin());
    let peak_a = a.frequency_response(a.u, a.v);
    let peak_b = b.frequency_response(b.u, b.v);
    let ra = |r: f64| a.frequency_response(r * ca, r * sa) / peak_a;
    let rb = |r: f64| b.frequency_response(r * ca, r * sa) / peak_b;
    let (mut lo, mut hi) = (a.radial.min(b.radial), a.radial.max(b.radial));
    let inner_a = a.radial <= b.radial;
    // ra - rb changes sign once between the two centres
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let d = ra(mid) - rb(mid);
        if (d > 0.0) == inner_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ra(0.5 * (lo + hi))
}

/// Crossing levels of consecutive same-angle filters in the first two rows
/// of the bank.
pub fn check_overlap() -> CheckResult {
    const DESIGN: f64 = 0.8;
    let ((levels, details), elapsed) = timed(|| {
        let bank = build_filterbank();
        let mut levels = Vec::new();
        let mut details = vec![format!("design level {DESIGN}")];
        for group in 0..2 {
            let mut by_angle: Vec<(f64, Vec<&GaborFilter>)> = Vec::new();
            for f in bank.filters().iter().filter(|f| f.scale_group == group) {
                match by_angle.iter_mut().find(|(a, _)| *a == f.angle_deg) {
                    Some((_, v)) => v.push(f),
                    None => by_angle.push((f.angle_deg, vec![f])),
                }
            }
            for (angle, mut fs) in by_angle {
                fs.sort_by(|a, b| a.radial.total_cmp(&b.radial));
                for pair in fs.windows(2) {
                    let level = overlap_level(pair[0], pair[1]);
                    let flag = if (0.65..=0.95).contains(&level) {
                        ""
                    } else {
                        "  flagged"
                    };
                    details.push(format!(
                        "row {} angle {angle:>6.2}: L {:.3}pi / {:.3}pi cross at {level:.3}{flag}",
                        group + 1,
                        pair[0].radial / PI,
                        pair[1].radial / PI
                    ));
                    levels.push(level);
                }
            }
        }
        (levels, details)
    });
    let lo = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let flagged = levels.iter().filter(|l| !(0.65..=0.95).contains(*l)).count();
    CheckResult {
        id: 2,
        name: "overlap rule",
        measured: format!(
            "{} pairs cross in [{lo:.3}, {hi:.3}], {flagged} flagged",
            levels.len()
        ),
        tolerance: "every level in [0.55, 0.95], < 10 s".into(),
        pass: !levels.is_empty() && lo >= 0.55 && hi <= 0.95 && elapsed.as_secs_f64() < 10.0,
        elapsed,
        details,
    }
}

fn wrap(p: f64) -> f64 {
    (p + PI).rem_euclid(2.0 * PI) - PI
}

/// Worst relative IA error and IP-gradient error of one channel on one
/// bin-aligned plane wave, over the pixels the kernel fully covers.
pub fn plane_wave_errors(
    filter: &GaborFilter,
    n: usize,
    amplitude: f64,
    phase: f64,
) -> Result<(f64, f64, (f64, f64))> {
    let step = 2.0 * PI / n as f64;
    let mut u = bin_align(filter.u, n);
    if u == 0.0 {
        // a wave constant along x has no quadrature partner
        u = step.copysign(filter.u);
    }
    let v = bin_align(filter.v, n);
    let img = plane_wave(n, n, u, v, amplitude, 0.0, phase);
    let asig = analytic_image(&img)?;
    let field = Demodulator::with_filters(&asig, vec![filter])?.channel(0);
    let expected_ia = amplitude * filter.frequency_response(u, v);
    // the analytic image carries the wave at its u > 0 representative
    let (gu, gv) = if u > 0.0 { (u, v) } else { (-u, -v) };
    let m = filter.kernel().radius();
    let (mut ia_err, mut grad_err) = (0.0f64, 0.0f64);
    for y in m..n - m - 1 {
        for x in m..n - m - 1 {
            ia_err = ia_err.max((field.ia.get(x, y) - expected_ia).abs() / expected_ia);
            let dx = wrap(field.ip.get(x + 1, y) - field.ip.get(x, y));
            let dy = wrap(field.ip.get(x, y + 1) - field.ip.get(x, y));
            grad_err = grad_err.max(((dx - gu).powi(2) + (dy - gv).powi(2)).sqrt() / gu.hypot(gv));
        }
    }
    Ok((ia_err, grad_err, (u, v)))
}

/// Relative RMS error of `A cos(phi)` from one channel against a chirp
/// centred on that channel, over the pixels the kernel fully covers.
pub fn chirp_reconstruction_error(filter: &GaborFilter, n: usize, chirp: &Chirp) -> Result<f64> {
    let img = chirp.render(n, n);
    let field = Demodulator::with_filters(&analytic_image(&img)?, vec![filter])?.channel(0);
    let m = filter.kernel().radius();
    let (mut err, mut energy) = (0.0, 0.0);
    for y in m..n - m {
        for x in m..n - m {
            let truth = *img.get(x, y);
            let rec = field.ia.get(x, y) * field.ip.get(x, y).cos();
            err += (rec - truth).powi(2);
            energy += truth * truth;
        }
    }
    Ok((err / energy).sqrt())
}

/// Plane waves at 20 random filter centres, plus a chirp inside one wide
/// channel.
pub fn check_demodulation(seed: u64) -> CheckResult {
    const N: usize = 256;
    let (outcome, elapsed) = timed(|| -> Result<_> {
        let bank = build_filterbank();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut details = Vec::new();
        let (mut ia_worst, mut grad_worst) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let i = rng.gen_range(0..bank.len());
            let f = &bank.filters()[i];
            let amp = rng.gen_range(20.0..100.0);
            let phase = rng.gen_range(-PI..PI);
            let (ia, grad, (u, v)) = plane_wave_errors(f, N, amp, phase)?;
            details.push(format!(
                "filter {i:>2} wave ({u:+.4}, {v:+.4}): IA {:.2e}, gradient {:.2e}",
                ia, grad
            ));
            ia_worst = ia_worst.max(ia);
            grad_worst = grad_worst.max(grad);
        }
        // widest row-1 channel, first angle
        let f = bank
            .filters()
            .iter()
            .find(|f| f.scale_group == 0 && f.sigma == 2.0)
            .expect("bank has sigma 2 filters");
        let chirp = Chirp {
            u0: f.u,
            v0: f.v,
            sweep: 0.2 / N as f64,
            amplitude: 50.0,
            am_depth: 0.3,
        };
        let rms = chirp_reconstruction_error(f, N, &chirp)?;
        details.push(format!(
            "chirp at ({:+.4}, {:+.4}) sweep {:.1e}: RMS {rms:.4}",
            f.u, f.v, chirp.sweep
        ));
        Ok((ia_worst, grad_worst, rms, details))
    });
    match outcome {
        Ok((ia, grad, rms, details)) => CheckResult {
            id: 3,
            name: "demodulation accuracy",
            measured: format!("IA error {ia:.2e}, gradient error {grad:.2e}, chirp RMS {rms:.4}"),
            tolerance: "< 0.02, < 0.02, < 0.10, < 30 s".into(),
            pass: ia < 0.02 && grad < 0.02 && rms < 0.10 && elapsed.as_secs_f64() < 30.0,
            elapsed,
            details,
        },
        Err(e) => failed(3, "demodulation accuracy", e, elapsed),
    }
}

fn failed(id: u32, name: &'static str, e: impl fmt::Display, elapsed: Duration) -> CheckResult {
    CheckResult {
        id,
        name,
        measured: format!("error: {e}"),
        tolerance: "no error".into(),
        pass: false,
        elapsed,
        details: Vec::new(),
    }
}

/// Quadrature of a bin-aligned cosine, DC invariance, real part preserved.
pub fn check_analytic() -> CheckResult {
    let (outcome, elapsed) = timed(|| -> Result<_> {
        let (w, h) = (64, 16);
        let u = bin_align(0.7, w);
        let v = bin_align(0.3, h);
        let img = plane_wave(w, h, u, v, 1.0, 0.0, 0.4);
        let asig = analytic_image(&img)?;
        let mut quad = 0.0f64;
        let mut real = 0.0f64;
        for y in 0..h {
            for x in 0..w {
                let z = asig.get(x, y);
                let sine = (u * x as f64 + v * y as f64 + 0.4).sin();
                quad = quad.max((z.im - sine).abs());
                real = real.max((z.re - img.get(x, y)).abs());
            }
        }
        let shifted = analytic_image(&img.map(|p| p + 37.0))?;
        let mut dc = 0.0f64;
        for (a, b) in asig.as_slice().iter().zip(shifted.as_slice()) {
            dc = dc.max((a.im - b.im).abs());
        }
        Ok((quad, dc, real))
    });
    match outcome {
        Ok((quad, dc, real)) => CheckResult {
            id: 4,
            name: "analytic signal",
            measured: format!("quadrature {quad:.1e}, DC shift {dc:.1e}, real part {real:.1e}"),
            tolerance: "each <= 1e-9".into(),
            pass: quad <= 1e-9 && dc <= 1e-9 && real <= 1e-9,
            elapsed,
            details: Vec::new(),
        },
        Err(e) => failed(4, "analytic signal", e, elapsed),
    }
}

/// A nearest-neighbour model memorizing the FM blocks of `frames`, each
/// labelled by `label(skin_fraction)`. Every block is stored `k` times so
/// that a memorized block's `k` nearest neighbours are its own copies.
pub fn phantom_model(
    frames: &[(&RgbImage, &GrayImage)],
    cfg: &PipelineConfig,
    label: impl Fn(f64) -> Label,
) -> Result<KnnModel> {
    let mut samples = Vec::new();
    for (rgb, fm) in frames {
        let skin = IntegralImage::new(&skin_mask(rgb));
        for (b, block) in extract_blocks(fm, cfg.block_size, cfg.stride)? {
            let frac = skin.sum(&b) as f64 / b.area() as f64;
            let l = label(frac);
            let v = block.to_u8();
            for _ in 0..cfg.k {
                samples.push((l, v.clone()));
            }
        }
    }
    KnnModel::new(cfg.k, cfg.block_size, cfg.block_size, samples)
}

/// 480x480 frame with one schematic face looking left.
pub fn left_face_frame() -> (RgbImage, FaceLayout) {
    let face = FaceLayout::new((240.0, 240.0), (60.0, 80.0), -0.25);
    (face_phantom(480, 480, crate::phantom::BACKGROUND, &[face]), face)
}

/// 480x480 frame with a 220x220 striped dark head and a skin patch inside its
/// right half.
pub fn head_frame() -> (RgbImage, BBox) {
    let (mut img, head) = head_phantom(480, 480, (240, 240), 220, 8);
    paint_box(&mut img, BBox::from_origin(290, 200, 40, 60), SKIN);
    (img, head)
}

fn face_directions(report: &FrameReport) -> Vec<Option<Direction>> {
    report
        .detections
        .iter()
        .filter(|d| d.kind == DetectionKind::Face)
        .map(|d| d.direction)
        .collect()
}

fn head_detections(report: &FrameReport) -> Vec<(BBox, (f64, f64), Option<Direction>)> {
    report
        .detections
        .iter()
        .filter(|d| d.kind == DetectionKind::BackOfHead)
        .map(|d| (d.bbox, d.centroid, d.direction))
        .collect()
}

/// Face path: the left-looking face is reported Left and its mirror Right.
pub fn check_face_phantom(bank: &Filterbank, cfg: &PipelineConfig) -> CheckResult {
    let (outcome, elapsed) = timed(|| -> Result<_> {
        let (frame, _) = left_face_frame();
        let mirror = frame.flip_horizontal();
        let (_, fm) = am_fm_images(&color::to_gray(&frame), bank)?;
        let (_, fm_m) = am_fm_images(&color::to_gray(&mirror), bank)?;
        let model = phantom_model(&[(&frame, &fm), (&mirror, &fm_m)], cfg, |frac| {
            if frac >= cfg.skin_fraction {
                Label::Face
            } else {
                Label::NonFace
            }
        })?;
        let a = face_directions(&analyze_frame("face", &frame, &model, bank, cfg)?);
        let b = face_directions(&analyze_frame("mirror", &mirror, &model, bank, cfg)?);
        Ok((a, b))
    });
    let secs = elapsed.as_secs_f64();
    match outcome {
        Ok((a, b)) => CheckResult {
            id: 7,
            name: "face phantom",
            measured: format!("faces {a:?}, mirrored {b:?}, {:.2} s per frame", secs / 2.0),
            tolerance: "[Left] and [Right], < 20 s per frame".into(),
            pass: a == [Some(Direction::Left)] && b == [Some(Direction::Right)] && secs / 2.0 < 20.0,
            elapsed,
            details: Vec::new(),
        },
        Err(e) => failed(7, "face phantom", e, elapsed),
    }
}

/// Head path: the box centre lands near the true centre and the skin patch
/// inside the right half sends the verdict Right, Left when mirrored.
pub fn check_head_phantom(bank: &Filterbank, cfg: &PipelineConfig) -> CheckResult {
    let (outcome, elapsed) = timed(|| -> Result<_> {
        let (frame, truth) = head_frame();
        let mirror = frame.flip_horizontal();
        let (_, fm) = am_fm_images(&color::to_gray(&frame), bank)?;
        let model = phantom_model(&[(&frame, &fm)], cfg, |_| Label::NonFace)?;
        let a = head_detections(&analyze_frame("head", &frame, &model, bank, cfg)?);
        let b = head_detections(&analyze_frame("mirror", &mirror, &model, bank, cfg)?);
        Ok((truth, a, b))
    });
    let secs = elapsed.as_secs_f64();
    match outcome {
        Ok((truth, a, b)) => {
            let (tx, ty) = truth.center();
            let mirror_tx = 479.0 - tx;
            let err = |d: &[(BBox, (f64, f64), Option<Direction>)], cx: f64| {
                d.first()
                    .map(|(b, _, _)| {
                        let (x, y) = b.center();
                        (x - cx).hypot(y - ty)
                    })
                    .unwrap_or(f64::INFINITY)
            };
            let (ea, eb) = (err(&a, tx), err(&b, mirror_tx));
            let dir = |d: &[(BBox, (f64, f64), Option<Direction>)]| d.first().and_then(|x| x.2);
            let (da, db) = (dir(&a), dir(&b));
            CheckResult {
                id: 7,
                name: "head phantom",
                measured: format!(
                    "centre error {ea:.1} px, mirrored {eb:.1} px; directions {da:?} / {db:?}; {:.2} s per frame",
                    secs / 2.0
                ),
                tolerance: "< 20 px, Right / Left, < 20 s per frame".into(),
                pass: a.len() == 1
                    && b.len() == 1
                    && ea < 20.0
                    && eb < 20.0
                    && da == Some(Direction::Right)
                    && db == Some(Direction::Left)
                    && secs / 2.0 < 20.0,
                elapsed,
                details: a
                    .iter()
                    .chain(&b)
                    .map(|(b, c, _)| format!("box {:?} centroid ({:.1}, {:.1})", b.as_array(), c.0, c.1))
                    .collect(),
            }
        }
        Err(e) => failed(7, "head phantom", e, elapsed),
    }
}

/// Full demodulation of a 640x480 frame and a 200x200 density scan over
/// 640x480.
pub fn check_performance(bank: &Filterbank) -> CheckResult {
    let chirp = Chirp {
        u0: 0.8,
        v0: 0.3,
        sweep: 0.5 / 640.0,
        amplitude: 60.0,
        am_depth: 0.4,
    };
    let frame = chirp.render(640, 480).map(|p| p + 128.0);
    let (demod, t_demod) = timed(|| am_fm_images(&frame, bank));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mask = Plane::from_fn(640, 480, |_, _| rng.gen_bool(0.3));
    let (scan, t_scan) = timed(|| highest_dot_density_area(&mask, 200));
    let (d, s) = (t_demod.as_secs_f64(), t_scan.as_secs_f64());
    CheckResult {
        id: 9,
        name: "performance",
        measured: format!("demodulation {d:.3} s, density scan {:.2} ms", s * 1e3),
        tolerance: "< 5 s, < 50 ms".into(),
        pass: demod.is_ok() && scan.is_ok() && d < 5.0 && s < 0.05,
        elapsed: t_demod + t_scan,
        details: Vec::new(),
    }
}

/// Every check, in order.
pub fn run_all(cfg: &PipelineConfig) -> Vec<CheckResult> {
    let bank = build_filterbank();
    vec![
        check_filterbank(),
        check_overlap(),
        check_demodulation(3),
        check_analytic(),
        check_face_phantom(&bank, cfg),
        check_head_phantom(&bank, cfg),
        check_performance(&bank),
    ]
}
