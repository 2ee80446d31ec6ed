//! Complex Gabor kernels and the 54-filter daisy-petal filterbank.
//!
//! A filter is placed in the frequency plane by its radial distance `L`
//! (radians/sample) and orientation `Ang` (degrees); the center frequency is
//! `(u, v) = L (cos Ang, sin Ang)`. The spatial kernel is
//!
//! ```text
//! g(x, y) = 1 / (2 pi gamma sigma^2) exp(-((x'/gamma)^2 + y'^2) / (2 sigma^2)) exp(j F x')
//! x' =  x cos(theta) + y sin(theta)
//! y' = -x sin(theta) + y cos(theta)
//! ```
//!
//! so that `F x' = u x + v y` and the discrete-time Fourier transform peaks at
//! `(u, v)`. Kernels are sampled on `[-R, R]^2` with `R = ceil(3 sigma)`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

/// Aspect ratio shared by every filter of the standard bank.
pub const GAMMA: f64 = 0.5;

/// Center-frequency geometry of one filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterFrequency {
    pub u: f64,
    pub v: f64,
    /// Radial center frequency `sqrt(u^2 + v^2)`.
    pub frequency: f64,
    /// Orientation `atan2(v, u)` in radians.
    pub theta: f64,
}

pub fn center_frequency(radial: f64, angle_deg: f64) -> Result<CenterFrequency> {
    if !(radial > 0.0) || !radial.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radial distance must be positive, got {radial}"
        )));
    }
    if !(0.0..360.0).contains(&angle_deg) {
        return Err(Error::InvalidParameter(format!(
            "angle must be in [0, 360) degrees, got {angle_deg}"
        )));
    }
    let a = 2.0 * PI * angle_deg / 360.0;
    let u = radial * a.cos();
    let v = radial * a.sin();
    Ok(CenterFrequency {
        u,
        v,
        frequency: u.hypot(v),
        theta: v.atan2(u),
    })
}

/// Square tap array of side `2 * radius + 1`, row-major with `(0, 0)` at the
/// center.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    radius: usize,
    taps: Vec<Complex64>,
}

impl Kernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    /// Tap at integer offset `(x, y)`, both in `[-radius, radius]`.
    pub fn at(&self, x: isize, y: isize) -> Complex64 {
        let r = self.radius as isize;
        debug_assert!(x.abs() <= r && y.abs() <= r);
        self.taps[((y + r) * (2 * r + 1) + (x + r)) as usize]
    }

    /// Iterates `(x, y, tap)` over the whole support.
    pub fn iter(&self) -> impl Iterator<Item = (isize, isize, Complex64)> + '_ {
        let r = self.radius as isize;
        let side = self.side();
        self.taps
            .iter()
            .enumerate()
            .map(move |(i, &t)| ((i % side) as isize - r, (i / side) as isize - r, t))
    }

    /// Discrete-time Fourier transform `sum K(x, y) exp(-j (wu x + wv y))`.
    pub fn dtft(&self, wu: f64, wv: f64) -> Complex64 {
        let r = self.radius as isize;
        // separable phase factors
        let ex: Vec<Complex64> = (-r..=r)
            .map(|x| Complex64::from_polar(1.0, -wu * x as f64))
            .collect();
        let side = self.side();
        let mut acc = Complex64::default();
        for (row, y) in self.taps.chunks_exact(side).zip(-r..=r) {
            let ey = Complex64::from_polar(1.0, -wv * y as f64);
            let s: Complex64 = row.iter().zip(&ex).map(|(t, e)| t * e).sum();
            acc += s * ey;
        }
        acc
    }

    fn scale(&mut self, k: f64) {
        for t in &mut self.taps {
            *t *= k;
        }
    }
}

/// Samples the unnormalized complex Gabor kernel.
pub fn gabor_kernel(frequency: f64, theta: f64, sigma: f64, gamma: f64) -> Result<Kernel> {
    if !(sigma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be >= 1, got {sigma}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    if !(frequency > 0.0 && frequency <= PI * 2f64.sqrt()) {
        return Err(Error::InvalidParameter(format!(
            "frequency must be in (0, pi*sqrt(2)], got {frequency}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let r = radius as isize;
    let (sin_t, cos_t) = theta.sin_cos();
    let norm = 1.0 / (2.0 * PI * gamma * sigma * sigma);
    let two_s2 = 2.0 * sigma * sigma;
    let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
    for y in -r..=r {
        for x in -r..=r {
            let (xf, yf) = (x as f64, y as f64);
            let xr = xf * cos_t + yf * sin_t;
            let yr = -xf * sin_t + yf * cos_t;
            let env = norm * (-((xr / gamma).powi(2) + yr * yr) / two_s2).exp();
            let (s, c) = (frequency * xr).sin_cos();
            taps.push(Complex64::new(env * c, env * s));
        }
    }
    Ok(Kernel { radius, taps })
}

/// One channel of the bank. The stored kernel is rescaled so that its
/// frequency response at `(u, v)` has unit magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborFilter {
    /// Radial distance of the center from the origin, radians/sample.
    pub radial: f64,
    pub angle_deg: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub frequency: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
    pub scale_group: usize,
    kernel: Kernel,
}

impl GaborFilter {
    pub fn new(radial: f64, angle_deg: f64, sigma: f64, gamma: f64, scale_group: usize) -> Result<Self> {
        let cf = center_frequency(radial, angle_deg)?;
        if cf.u.abs() > PI + 1e-12 || cf.v.abs() > PI + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "center ({}, {}) lies outside the Nyquist square",
                cf.u, cf.v
            )));
        }
        let mut kernel = gabor_kernel(cf.frequency, cf.theta, sigma, gamma)?;
        // The response at the center is a positive real sum of envelope taps,
        // so a real rescale keeps the kernel conjugate-symmetric.
        let gain = kernel.dtft(cf.u, cf.v).norm();
        kernel.scale(1.0 / gain);
        Ok(GaborFilter {
            radial,
            angle_deg,
            sigma,
            gamma,
            frequency: cf.frequency,
            theta: cf.theta,
            u: cf.u,
            v: cf.v,
            scale_group,
            kernel,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Magnitude of the kernel's DTFT at `(wu, wv)`, radians/sample.
    pub fn frequency_response(&self, wu: f64, wv: f64) -> f64 {
        self.kernel.dtft(wu, wv).norm()
    }
}

/// Construction parameters of one filter, `radial = l_over_pi * pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub l_over_pi: f64,
    pub angle_deg: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub scale_group: usize,
}

/// The daisy-petal layout: four rows of (L/pi, sigma) pairs, each row sharing
/// one angle set.
pub fn standard_specs() -> Vec<FilterSpec> {
    type Row = (&'static [(f64, f64)], Vec<f64>);
    let rows: [Row; 4] = [
        (
            &[
                (0.047, 11.0),
                (0.125, 6.0),
                (0.242, 4.0),
                (0.406, 3.0),
                (0.648, 2.0),
                (0.938, 2.0),
            ],
            vec![20.25, 65.25, 110.25, 155.25],
        ),
        (
            &[
                (0.102, 7.0),
                (0.195, 6.0),
                (0.313, 4.0),
                (0.461, 3.0),
                (0.695, 2.0),
            ],
            vec![42.75, 87.75, 133.75, 177.75],
        ),
        (&[(0.094, 3.0)], (0..8).map(|k| 10.0 + 22.5 * k as f64).collect()),
        (&[(1.094, 2.0)], vec![43.5, 133.5]),
    ];
    let mut specs = Vec::with_capacity(54);
    for (group, (pairs, angles)) in rows.iter().enumerate() {
        for &(l_over_pi, sigma) in pairs.iter() {
            for &angle_deg in angles {
                specs.push(FilterSpec {
                    l_over_pi,
                    angle_deg,
                    sigma,
                    gamma: GAMMA,
                    scale_group: group,
                });
            }
        }
    }
    specs
}

/// An ordered, immutable set of Gabor channels.
#[derive(Debug, Clone)]
pub struct Filterbank {
    filters: Vec<GaborFilter>,
}

/// The standard 54-filter bank.
pub fn build_filterbank() -> Filterbank {
    Filterbank::from_specs(&standard_specs()).expect("standard table is valid")
}

impl Filterbank {
    pub fn from_specs(specs: &[FilterSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Empty("filterbank has no filters"));
        }
        for (i, a) in specs.iter().enumerate() {
            if let Some(j) = specs[..i]
                .iter()
                .position(|b| b.l_over_pi == a.l_over_pi && b.angle_deg == a.angle_deg)
            {
                return Err(Error::InvalidParameter(format!(
                    "duplicate filter (L = {}pi, Ang = {}) at rows {} and {}",
                    a.l_over_pi,
                    a.angle_deg,
                    j + 1,
                    i + 1
                )));
            }
        }
        let filters = specs
            .iter()
            .map(|s| GaborFilter::new(s.l_over_pi * PI, s.angle_deg, s.sigma, s.gamma, s.scale_group))
            .collect::<Result<Vec<_>>>()?;
        Ok(Filterbank { filters })
    }

    /// Parses a parameter file: one filter per line as
    /// `L_over_pi, Ang_deg, sigma, gamma, scale_group`. Commas or whitespace
    /// separate fields; `#` starts a comment.
    pub fn parse_params(text: &str) -> Result<Self> {
        let mut specs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 5 {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected 5 fields, found {}",
                    n + 1,
                    fields.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i].parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("line {}: bad number {:?}", n + 1, fields[i]))
                })
            };
            let scale_group = fields[4].parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("line {}: bad scale group {:?}", n + 1, fields[4]))
            })?;
            specs.push(FilterSpec {
                l_over_pi: num(0)?,
                angle_deg: num(1)?,
                sigma: num(2)?,
                gamma: num(3)?,
                scale_group,
            });
        }
        Filterbank::from_specs(&specs)
    }

    pub fn load_params(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Filterbank::parse_params(&text)
    }

    pub fn filters(&self) -> &[GaborFilter] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// The common aspect ratio, if all filters share one.
    pub fn gamma(&self) -> Option<f64> {
        let g = self.filters[0].gamma;
        self.filters.iter().all(|f| f.gamma == g).then_some(g)
    }

    /// Largest kernel radius in the bank.
    pub fn max_radius(&self) -> usize {
        self.filters.iter().map(|f| f.kernel.radius()).max().unwrap_or(0)
    }

    pub fn scale_groups(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.filters.iter().map(|f| f.scale_group).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn center_frequency_examples() {
        let c = center_frequency(1.3, 0.0).unwrap();
        assert_eq!((c.u, c.v, c.frequency, c.theta), (1.3, 0.0, 1.3, 0.0));

        let c = center_frequency(0.938 * PI, 20.25).unwrap();
        assert_abs_diff_eq!(c.u / PI, 0.8801, epsilon = 1e-4);
        assert_abs_diff_eq!(c.v / PI, 0.3247, epsilon = 1e-4);

        let c = center_frequency(1.094 * PI, 43.5).unwrap();
        assert_abs_diff_eq!(c.u / PI, 0.7936, epsilon = 1e-4);
        assert_abs_diff_eq!(c.v / PI, 0.7531, epsilon = 1e-4);

        assert!(center_frequency(0.0, 10.0).is_err());
        assert!(center_frequency(-1.0, 10.0).is_err());
    }

    #[test]
    fn kernel_origin_value() {
        let k = gabor_kernel(1.0, 0.3, 2.0, 0.5).unwrap();
        let c = k.at(0, 0);
        assert_abs_diff_eq!(c.re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_eq!(c.im, 0.0);
        assert_eq!(k.side(), 13);
    }

    #[test]
    fn kernel_preconditions() {
        assert!(gabor_kernel(1.0, 0.0, 0.5, 0.5).is_err());
        assert!(gabor_kernel(1.0, 0.0, 2.0, 0.0).is_err());
        assert!(gabor_kernel(0.0, 0.0, 2.0, 0.5).is_err());
        assert!(gabor_kernel(4.5, 0.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn bank_shape() {
        let bank = build_filterbank();
        assert_eq!(bank.len(), 54);
        let mut sizes = [0; 4];
        for f in bank.filters() {
            sizes[f.scale_group] += 1;
        }
        assert_eq!(sizes, [24, 20, 8, 2]);
        assert_eq!(bank.gamma(), Some(0.5));
        assert_eq!(bank.max_radius(), 33);
    }

    #[test]
    fn duplicate_override_rejected() {
        let text = "0.2, 30, 3, 0.5, 0\n0.2 30 4 0.5 1\n";
        let err = Filterbank::parse_params(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn parses_override_file() {
        let text = "# custom\n0.25, 45, 3, 0.5, 0\n0.5 90 2 0.75 1 # trailing\n";
        let bank = Filterbank::parse_params(text).unwrap();
        assert_eq!(bank.len(), 2);
        assert_eq!(bank.gamma(), None);
        assert_eq!(bank.filters()[1].scale_group, 1);
        assert!(Filterbank::parse_params("0.25, 45, 3\n").is_err());
    }

    #[test]
    fn normalized_at_center() {
        for f in build_filterbank().filters() {
            assert_abs_diff_eq!(f.frequency_response(f.u, f.v), 1.0, epsilon = 1e-12);
        }
    }
}
