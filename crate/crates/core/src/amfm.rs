//! AM-FM demodulation: analytic image, channel filtering, dominant component
//! analysis and the AM/FM display images.
//!
//! The analytic image keeps the input as its real part and adds the partial
//! Hilbert transform along `x` as the imaginary part. Each Gabor channel
//! applied to it yields `A_n exp(j phi_n)`; the instantaneous amplitude is the
//! magnitude and the instantaneous phase the four-quadrant angle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::{fast_len, Fft2d};
use crate::gabor::{Filterbank, GaborFilter, Kernel};
use crate::image::{GrayImage, Plane};
use crate::{par, Error, Result};

/// Complex image whose real part is the source intensity.
pub type AnalyticImage = Plane<Complex64>;

/// Minimum side accepted by [`analytic_image`].
pub const MIN_ANALYTIC_SIDE: usize = 8;

/// Builds the extended analytic image `I + j H_x[I]`.
///
/// Every row is transformed and multiplied by `-j sign(u)`, where the DC and
/// Nyquist bins get `sign = 0`. That is the 2-D DFT multiplier restricted to
/// its only axis of variation.
pub fn analytic_image(img: &GrayImage) -> Result<AnalyticImage> {
    let (w, h) = img.dims();
    if w < MIN_ANALYTIC_SIDE || h < MIN_ANALYTIC_SIDE {
        return Err(Error::Dimensions(format!(
            "analytic image needs at least {MIN_ANALYTIC_SIDE}x{MIN_ANALYTIC_SIDE}, got {w}x{h}"
        )));
    }
    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(w);
    let inv = planner.plan_fft_inverse(w);
    let mut data: Vec<Complex64> = img.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::fft::process_rows(&mut data, w, &fwd);
    let half = w / 2;
    par::for_each_chunk_mut(&mut data, w, |_, row| {
        for (k, c) in row.iter_mut().enumerate() {
            *c = if k == 0 || (w % 2 == 0 && k == half) {
                Complex64::default()
            } else if k < w.div_ceil(2) {
                // -j * c
                Complex64::new(c.im, -c.re)
            } else {
                Complex64::new(-c.im, c.re)
            };
        }
    });
    crate::fft::process_rows(&mut data, w, &inv);
    let scale = 1.0 / w as f64;
    let out = img
        .as_slice()
        .iter()
        .zip(&data)
        .map(|(&re, hil)| Complex64::new(re, hil.re * scale))
        .collect();
    Plane::from_vec(w, h, out)
}

/// Instantaneous amplitude and phase of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelField {
    pub channel_index: usize,
    pub scale_group: usize,
    /// Instantaneous amplitude, `>= 0`.
    pub ia: GrayImage,
    /// Instantaneous phase in `(-pi, pi]`.
    pub ip: GrayImage,
}

/// Per-pixel dominant component over a set of channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AmFmField {
    pub dominant_ia: GrayImage,
    pub dominant_ip: GrayImage,
    pub dominant_channel: Plane<u32>,
    pub n_channels: usize,
}

/// Which channels take part in dominant component analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    ScaleGroup(usize),
}

impl Selection {
    fn admits(&self, group: usize) -> bool {
        match *self {
            Selection::All => true,
            Selection::ScaleGroup(g) => g == group,
        }
    }
}

/// Phase of `z` in `(-pi, pi]`, with `phase(0) = 0`.
#[inline]
pub fn phase(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let p = z.im.atan2(z.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// Half-sample symmetric reflection of `i` into `[0, n)`.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Filters one analytic image with many channels, sharing the forward
/// transform of the mirror-extended input.
pub struct Demodulator<'a> {
    filters: Vec<&'a GaborFilter>,
    width: usize,
    height: usize,
    pad: usize,
    fft: Fft2d,
    spectrum: Vec<Complex64>,
}

impl<'a> Demodulator<'a> {
    pub fn new(asig: &AnalyticImage, bank: &'a Filterbank) -> Result<Self> {
        Self::with_filters(asig, bank.filters().iter().collect())
    }

    pub fn with_filters(asig: &AnalyticImage, filters: Vec<&'a GaborFilter>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::Empty("no filters to demodulate with"));
        }
        let (w, h) = asig.dims();
        let pad = filters.iter().map(|f| f.kernel().radius()).max().unwrap_or(0);
        let side = 2 * pad + 1;
        if w < side || h < side {
            return Err(Error::Dimensions(format!(
                "{w}x{h} image is smaller than the {side}x{side} kernel"
            )));
        }
        let fw = fast_len(w + 2 * pad);
        let fh = fast_len(h + 2 * pad);
        let fft = Fft2d::new(fw, fh);
        let mut spectrum = vec![Complex64::default(); fw * fh];
        let src = asig.as_slice();
        par::for_each_chunk_mut(&mut spectrum, fw, |ey, row| {
            if ey >= h + 2 * pad {
                return;
            }
            let sy = reflect(ey as isize - pad as isize, h);
            for (ex, v) in row.iter_mut().take(w + 2 * pad).enumerate() {
                let sx = reflect(ex as isize - pad as isize, w);
                *v = src[sy * w + sx];
            }
        });
        fft.forward(&mut spectrum);
        Ok(Demodulator {
            filters,
            width: w,
            height: h,
            pad,
            fft,
            spectrum,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.filters.len()
    }

    /// Complex channel output `(K * I_AS)` over the image.
    ///
    /// The analytic image has no energy at negative horizontal frequencies,
    /// so a filter centred at `u < 0` is applied as its conjugate, centred at
    /// `(-u, -v)`. Amplitude is unchanged and the phase changes sign, which
    /// leaves `cos` of the phase of a real input intact.
    pub fn filter_output(&self, index: usize) -> Plane<Complex64> {
        let filter = self.filters[index];
        let (fw, fh) = (self.fft.width(), self.fft.height());
        let mut buf = vec![Complex64::default(); fw * fh];
        let rows = place_kernel(filter.kernel(), filter.u < 0.0, &mut buf, fw, fh);
        self.fft.forward_sparse_rows(&mut buf, &rows);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        let (w, p) = (self.width, self.pad);
        let mut out = Vec::with_capacity(w * self.height);
        for y in 0..self.height {
            let start = (y + p) * fw + p;
            out.extend_from_slice(&buf[start..start + w]);
        }
        Plane::from_vec(w, self.height, out).expect("interior matches input size")
    }

    pub fn channel(&self, index: usize) -> ChannelField {
        let out = self.filter_output(index);
        let filter = self.filters[index];
        ChannelField {
            channel_index: index,
            scale_group: filter.scale_group,
            ia: out.map(|z| z.norm()),
            ip: out.map(|&z| phase(z)),
        }
    }

    /// Every channel, in filter order.
    pub fn channels(&self) -> Vec<ChannelField> {
        par::map_indexed(self.filters.len(), |i| self.channel(i))
    }

    /// Dominant component analysis without materializing all channels.
    pub fn dominant(&self, selection: Selection) -> Result<AmFmField> {
        let chosen: Vec<usize> = (0..self.filters.len())
            .filter(|&i| selection.admits(self.filters[i].scale_group))
            .collect();
        if chosen.is_empty() {
            return Err(Error::Empty("selection matches no channel"));
        }
        let n = chosen.len();
        let field = par::map_reduce(
            n,
            |k| single_channel_field(&self.channel(chosen[k]), n),
            merge_fields,
        )
        .expect("non-empty selection");
        Ok(field)
    }
}

/// Writes kernel taps into a zeroed `fw`x`fh` grid with circular indexing;
/// returns the rows touched.
fn place_kernel(kernel: &Kernel, conjugate: bool, buf: &mut [Complex64], fw: usize, fh: usize) -> Vec<usize> {
    let r = kernel.radius() as isize;
    for (x, y, t) in kernel.iter() {
        let gx = x.rem_euclid(fw as isize) as usize;
        let gy = y.rem_euclid(fh as isize) as usize;
        buf[gy * fw + gx] = if conjugate { t.conj() } else { t };
    }
    let mut rows: Vec<usize> = (-r..=r).map(|y| y.rem_euclid(fh as isize) as usize).collect();
    rows.sort_unstable();
    rows
}

fn single_channel_field(ch: &ChannelField, n_channels: usize) -> AmFmField {
    let (w, h) = ch.ia.dims();
    AmFmField {
        dominant_ia: ch.ia.clone(),
        dominant_ip: ch.ip.clone(),
        dominant_channel: Plane::filled(w, h, ch.channel_index as u32),
        n_channels,
    }
}

/// Pixelwise max of IA with ties going to the lower channel index; this is
/// associative and commutative, so any reduction order gives the same field.
fn merge_fields(mut a: AmFmField, b: AmFmField) -> AmFmField {
    let ia_a = a.dominant_ia.as_mut_slice();
    let ip_a = a.dominant_ip.as_mut_slice();
    let ch_a = a.dominant_channel.as_mut_slice();
    let ia_b = b.dominant_ia.as_slice();
    let ip_b = b.dominant_ip.as_slice();
    let ch_b = b.dominant_channel.as_slice();
    for i in 0..ia_a.len() {
        if ia_b[i] > ia_a[i] || (ia_b[i] == ia_a[i] && ch_b[i] < ch_a[i]) {
            ia_a[i] = ia_b[i];
            ip_a[i] = ip_b[i];
            ch_a[i] = ch_b[i];
        }
    }
    a
}

/// Filters an analytic image with a single channel.
pub fn demodulate_channel(asig: &AnalyticImage, filter: &GaborFilter) -> Result<ChannelField> {
    let dm = Demodulator::with_filters(asig, vec![filter])?;
    Ok(dm.channel(0))
}

/// Per-pixel dominant channel over `channels` restricted to `selection`.
pub fn dominant_components(channels: &[ChannelField], selection: Selection) -> Result<AmFmField> {
    let selected: Vec<&ChannelField> = channels
        .iter()
        .filter(|c| selection.admits(c.scale_group))
        .collect();
    let Some(first) = selected.first() else {
        return Err(Error::Empty("no channels to select from"));
    };
    for c in &selected[1..] {
        first.ia.same_dims(&c.ia)?;
    }
    let n = selected.len();
    Ok(selected
        .iter()
        .map(|c| single_channel_field(c, n))
        .reduce(merge_fields)
        .expect("non-empty"))
}

/// Gray image -> analytic image -> dominant components over `bank`.
pub fn demodulate_image(img: &GrayImage, bank: &Filterbank, selection: Selection) -> Result<AmFmField> {
    let asig = analytic_image(img)?;
    Demodulator::new(&asig, bank)?.dominant(selection)
}

impl AmFmField {
    /// `A cos(phi)` of the dominant component.
    pub fn reconstruct(&self) -> GrayImage {
        let data = self
            .dominant_ia
            .as_slice()
            .iter()
            .zip(self.dominant_ip.as_slice())
            .map(|(a, p)| a * p.cos())
            .collect();
        Plane::from_vec(self.dominant_ia.width(), self.dominant_ia.height(), data).expect("same dims")
    }
}

/// `cos(phi)` mapped from [-1, 1] to [0, 255].
pub fn fm_image(field: &AmFmField) -> GrayImage {
    field.dominant_ip.map(|p| 127.5 * (p.cos() + 1.0))
}

/// Dominant IA stretched so its min maps to 0 and its max to 255; a flat
/// field (relative spread below 1e-9) maps to all zeros.
pub fn am_image(field: &AmFmField) -> GrayImage {
    stretch(&field.dominant_ia)
}

pub(crate) fn stretch(plane: &GrayImage) -> GrayImage {
    let (lo, hi) = plane.min_max();
    let span = hi - lo;
    if !(span > 1e-9 * hi.abs().max(lo.abs())) {
        return plane.map(|_| 0.0);
    }
    plane.map(|v| (v - lo) / span * 255.0)
}

/// Phase mapped affinely from (-pi, pi] onto [0, 255], for debug dumps.
pub fn phase_image(ip: &GrayImage) -> GrayImage {
    ip.map(|p| (p + PI) / (2.0 * PI) * 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::build_filterbank;

    fn plane(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> GrayImage {
        Plane::from_fn(w, h, f)
    }

    #[test]
    fn constant_has_no_quadrature() {
        let img = plane(16, 12, |_, _| 37.5);
        let a = analytic_image(&img).unwrap();
        for (z, &v) in a.as_slice().iter().zip(img.as_slice()) {
            assert_eq!(z.re, v);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn odd_width_cosine() {
        let w = 15;
        let k = 4.0;
        let img = plane(w, 9, |x, _| (2.0 * PI * k * x as f64 / w as f64).cos());
        let a = analytic_image(&img).unwrap();
        for x in 0..w {
            let want = (2.0 * PI * k * x as f64 / w as f64).sin();
            assert!((a.get(x, 3).im - want).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small_for_analytic() {
        assert!(analytic_image(&plane(7, 40, |_, _| 0.0)).is_err());
    }

    #[test]
    fn phase_range() {
        assert_eq!(phase(Complex64::new(0.0, 0.0)), 0.0);
        assert_eq!(phase(Complex64::new(-0.0, -0.0)), 0.0);
        assert_eq!(phase(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(phase(Complex64::new(-1.0, 0.0)), PI);
    }

    #[test]
    fn reflect_indices() {
        let got: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
    }

    #[test]
    fn zero_image_demodulates_to_zero() {
        let bank = build_filterbank();
        let asig = analytic_image(&plane(72, 70, |_, _| 0.0)).unwrap();
        let ch = demodulate_channel(&asig, &bank.filters()[0]).unwrap();
        assert!(ch.ia.as_slice().iter().all(|&v| v == 0.0));
        assert!(ch.ip.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn image_smaller_than_kernel() {
        let bank = build_filterbank();
        let asig = analytic_image(&plane(40, 40, |_, _| 1.0)).unwrap();
        // sigma = 11 -> 67x67 kernel
        assert!(demodulate_channel(&asig, &bank.filters()[0]).is_err());
        assert!(demodulate_channel(&asig, &bank.filters()[20]).is_ok());
    }

    fn field(ch: usize, ia: &[f64]) -> ChannelField {
        ChannelField {
            channel_index: ch,
            scale_group: ch % 2,
            ia: Plane::from_vec(ia.len(), 1, ia.to_vec()).unwrap(),
            ip: Plane::from_vec(ia.len(), 1, vec![ch as f64 * 0.1; ia.len()]).unwrap(),
        }
    }

    #[test]
    fn dca_max_and_ties() {
        let chans = vec![field(0, &[0.2, 0.5]), field(1, &[0.7, 0.5])];
        let f = dominant_components(&chans, Selection::All).unwrap();
        assert_eq!(f.dominant_ia.as_slice(), &[0.7, 0.5]);
        assert_eq!(f.dominant_channel.as_slice(), &[1, 0]);
        assert_eq!(f.n_channels, 2);

        let single = dominant_components(&chans[..1], Selection::All).unwrap();
        assert_eq!(single.dominant_ia, chans[0].ia);
        assert_eq!(single.dominant_ip, chans[0].ip);

        let g1 = dominant_components(&chans, Selection::ScaleGroup(0)).unwrap();
        assert_eq!(g1.dominant_channel.as_slice(), &[0, 0]);
        assert!(dominant_components(&chans, Selection::ScaleGroup(7)).is_err());
        assert!(dominant_components(&[], Selection::All).is_err());

        let odd = vec![field(0, &[1.0]), field(1, &[1.0, 2.0])];
        assert!(dominant_components(&odd, Selection::All).is_err());
    }

    #[test]
    fn display_images() {
        let mk = |ia: Vec<f64>, ip: Vec<f64>| AmFmField {
            dominant_ia: Plane::from_vec(ia.len(), 1, ia).unwrap(),
            dominant_ip: Plane::from_vec(ip.len(), 1, ip).unwrap(),
            dominant_channel: Plane::filled(2, 1, 0),
            n_channels: 1,
        };
        let f = mk(vec![1.0, 3.0], vec![0.0, PI]);
        assert_eq!(am_image(&f).as_slice(), &[0.0, 255.0]);
        assert_eq!(fm_image(&f).as_slice(), &[255.0, 0.0]);
        let flat = mk(vec![2.5, 2.5], vec![0.0, 0.0]);
        assert_eq!(am_image(&flat).as_slice(), &[0.0, 0.0]);
    }
}
