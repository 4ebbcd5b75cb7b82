//! Time-frequency spectra of an epoch: short-time Fourier transform,
//! Stockwell transform, pseudo Wigner–Ville distribution and
//! synchro-extracting transform, plus their grayscale rendering.
//!
//! Every matrix is stored row-major with rows indexing frequency bins and
//! columns indexing time frames.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encode::RasterImage;
use crate::fft::{analytic_signal, real_to_complex, Fft};
use crate::util::round_to_u8;
use crate::{Error, Result};

/// Standard deviation of the Gaussian window as a fraction of its length.
pub const GAUSSIAN_STD_FRACTION: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
    Gaussian,
}

impl Window {
    /// Symmetric window of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let centre = (len as f64 - 1.0) / 2.0;
        (0..len)
            .map(|i| match self {
                Window::Rectangular => 1.0,
                Window::Hann if len == 1 => 1.0,
                Window::Hann => 0.5 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos(),
                Window::Gaussian => {
                    let z = (i as f64 - centre) / (GAUSSIAN_STD_FRACTION * len as f64);
                    (-0.5 * z * z).exp()
                }
            })
            .collect()
    }

    pub fn from_name(name: &str) -> Result<Window> {
        match name.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
            "hann" | "hanning" => Ok(Window::Hann),
            "gaussian" | "gauss" => Ok(Window::Gaussian),
            other => Err(Error::InvalidParameter(format!("unknown window `{other}`"))),
        }
    }
}

/// Time derivative (per sample) of the Gaussian window.
fn gaussian_derivative(len: usize) -> Vec<f64> {
    let centre = (len as f64 - 1.0) / 2.0;
    let sigma = GAUSSIAN_STD_FRACTION * len as f64;
    Window::Gaussian
        .coefficients(len)
        .into_iter()
        .enumerate()
        .map(|(i, g)| -(i as f64 - centre) / (sigma * sigma) * g)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    Stft,
    Stockwell,
    WignerVille,
    Set,
}

impl TransformKind {
    pub const ALL: [TransformKind; 4] = [
        TransformKind::Stockwell,
        TransformKind::WignerVille,
        TransformKind::Set,
        TransformKind::Stft,
    ];

    pub fn code(self) -> u32 {
        match self {
            TransformKind::Stft => 0,
            TransformKind::Stockwell => 1,
            TransformKind::WignerVille => 2,
            TransformKind::Set => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            TransformKind::Stft => "stft",
            TransformKind::Stockwell => "st",
            TransformKind::WignerVille => "wvt",
            TransformKind::Set => "set",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumData {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub kind: TransformKind,
    pub rows: usize,
    pub cols: usize,
    pub frame_hop: usize,
    pub window_len: usize,
    pub data: SpectrumData,
}

impl Spectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        match &self.data {
            SpectrumData::Complex(v) => v.iter().map(|z| z.norm()).collect(),
            SpectrumData::Real(v) => v.iter().map(|x| x.abs()).collect(),
        }
    }

    pub fn complex_values(&self) -> Option<&[Complex64]> {
        match &self.data {
            SpectrumData::Complex(v) => Some(v),
            SpectrumData::Real(_) => None,
        }
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.data {
            SpectrumData::Real(v) => Some(v),
            SpectrumData::Complex(_) => None,
        }
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        match &self.data {
            SpectrumData::Complex(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            SpectrumData::Real(v) => v.iter().map(|x| x * x).sum(),
        }
    }

    /// Binary dump: `kind, rows, cols, hop, window_len` as little-endian
    /// `u32`, followed by row-major little-endian `f64` magnitudes.
    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = [
            self.kind.code(),
            self.rows as u32,
            self.cols as u32,
            self.frame_hop as u32,
            self.window_len as u32,
        ];
        let mut bytes = Vec::with_capacity(20 + self.rows * self.cols * 8);
        for h in header {
            bytes.extend_from_slice(&h.to_le_bytes());
        }
        for m in self.magnitudes() {
            bytes.extend_from_slice(&m.to_le_bytes());
        }
        w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    /// Reads a dump back as a real magnitude spectrum.
    pub fn read_dump(path: impl AsRef<Path>) -> Result<Spectrum> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file)
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        if bytes.len() < 20 {
            return Err(Error::InvalidParameter("spectrum dump shorter than its header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap());
        let kind = TransformKind::from_code(word(0))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown spectrum kind {}", word(0))))?;
        let (rows, cols) = (word(1) as usize, word(2) as usize);
        let body = &bytes[20..];
        if body.len() != rows * cols * 8 {
            return Err(Error::InvalidParameter(format!(
                "spectrum dump body has {} bytes, expected {}",
                body.len(),
                rows * cols * 8
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Spectrum {
            kind,
            rows,
            cols,
            frame_hop: word(3) as usize,
            window_len: word(4) as usize,
            data: SpectrumData::Real(values),
        })
    }
}

fn frame_count(len: usize, window_len: usize, hop: usize) -> Result<usize> {
    if window_len == 0 || window_len > len {
        return Err(Error::InvalidParameter(format!(
            "window length {window_len} must be in 1..={len}"
        )));
    }
    if hop == 0 {
        return Err(Error::InvalidParameter("hop must be at least 1".into()));
    }
    Ok((len - window_len) / hop + 1)
}

/// Framed DFT with the `1/T` normalization, returning bins `0..=T/2` for each
/// frame laid out as `[bin * frames + frame]`.
fn framed_dft(x: &[f64], coeffs: &[f64], hop: usize, frames: usize) -> Vec<Complex64> {
    let t_len = coeffs.len();
    let bins = t_len / 2 + 1;
    let scale = 1.0 / t_len as f64;
    let mut fft = Fft::new();
    let mut out = vec![Complex64::default(); bins * frames];
    let mut buf = vec![Complex64::default(); t_len];
    for f in 0..frames {
        let start = f * hop;
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(coeffs[t] * x[start + t], 0.0);
        }
        fft.forward(&mut buf);
        for k in 0..bins {
            out[k * frames + f] = buf[k] * scale;
        }
    }
    out
}

/// Short-time Fourier transform, `X(k) = (1/T) Σ w(t) x(t) e^{-i2πkt/T}` per frame.
pub fn stft(x: &[f64], window: Window, window_len: usize, hop: usize) -> Result<Spectrum> {
    let frames = frame_count(x.len(), window_len, hop)?;
    let coeffs = window.coefficients(window_len);
    Ok(Spectrum {
        kind: TransformKind::Stft,
        rows: window_len / 2 + 1,
        cols: frames,
        frame_hop: hop,
        window_len,
        data: SpectrumData::Complex(framed_dft(x, &coeffs, hop, frames)),
    })
}

/// Periodized frequency-domain Gaussian of voice `k`: the DFT of a sampled
/// time-domain Gaussian with `σ = N/k` samples, wrapped on the circle.
fn stockwell_voice_gaussian(n: usize, k: usize) -> Vec<f64> {
    let nf = n as f64;
    let kf = k as f64;
    (0..n)
        .map(|m| {
            (-3..=2)
                .map(|q| {
                    let d = m as f64 + q as f64 * nf;
                    (-2.0 * PI * PI * d * d / (kf * kf)).exp()
                })
                .sum()
        })
        .collect()
}

/// Discrete Stockwell transform via the frequency-domain form. Rows are
/// voices `0..=N/2`; row 0 holds the signal mean.
pub fn stockwell(x: &[f64]) -> Result<Spectrum> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "Stockwell transform needs at least 4 samples, got {n}"
        )));
    }
    let rows = n / 2 + 1;
    let mut fft = Fft::new();
    let mut spectrum = real_to_complex(x);
    fft.forward(&mut spectrum);
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut out = vec![Complex64::new(mean, 0.0); rows * n];
    let mut voice = vec![Complex64::default(); n];
    for k in 1..rows {
        let gauss = stockwell_voice_gaussian(n, k);
        for (m, slot) in voice.iter_mut().enumerate() {
            *slot = spectrum[(m + k) % n] * gauss[m];
        }
        fft.inverse(&mut voice);
        out[k * n..(k + 1) * n].copy_from_slice(&voice);
    }
    Ok(Spectrum {
        kind: TransformKind::Stockwell,
        rows,
        cols: n,
        frame_hop: 1,
        window_len: n,
        data: SpectrumData::Complex(out),
    })
}

/// Number of frequency bins of the pseudo Wigner–Ville distribution for a
/// lag window of `window_len` samples. Bin `k` sits at `k / (2·bins)`
/// cycles per sample.
pub fn wvd_frequency_bins(window_len: usize) -> usize {
    window_len.next_power_of_two()
}

/// Raw (complex) pseudo Wigner–Ville accumulation of the analytic signal,
/// laid out `[bin * N + t]`.
pub fn wigner_ville_complex(x: &[f64], window: Window, window_len: usize) -> Result<Vec<Complex64>> {
    let n = x.len();
    if window_len % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "lag window length must be odd, got {window_len}"
        )));
    }
    if window_len > n {
        return Err(Error::InvalidParameter(format!(
            "lag window length {window_len} exceeds signal length {n}"
        )));
    }
    let z = analytic_signal(x);
    let half = (window_len / 2) as isize;
    let coeffs = window.coefficients(window_len);
    let bins = wvd_frequency_bins(window_len);
    let mut fft = Fft::new();
    let mut out = vec![Complex64::default(); bins * n];
    let mut kernel = vec![Complex64::default(); bins];
    for t in 0..n as isize {
        kernel.iter_mut().for_each(|v| *v = Complex64::default());
        let reach = half.min(t).min(n as isize - 1 - t);
        for m in -reach..=reach {
            let w = coeffs[(m + half) as usize];
            let value = z[(t + m) as usize] * z[(t - m) as usize].conj() * w;
            kernel[m.rem_euclid(bins as isize) as usize] = value;
        }
        fft.forward(&mut kernel);
        for (k, v) in kernel.iter().enumerate() {
            out[k * n + t as usize] = *v;
        }
    }
    Ok(out)
}

/// Pseudo Wigner–Ville distribution. The lag product is Hermitian for
/// symmetric windows, so the imaginary part is rounding residue and is
/// dropped.
pub fn wigner_ville(x: &[f64], window: Window, window_len: usize) -> Result<Spectrum> {
    let raw = wigner_ville_complex(x, window, window_len)?;
    Ok(Spectrum {
        kind: TransformKind::WignerVille,
        rows: wvd_frequency_bins(window_len),
        cols: x.len(),
        frame_hop: 1,
        window_len,
        data: SpectrumData::Real(raw.into_iter().map(|z| z.re).collect()),
    })
}

/// Coefficients below this fraction of the spectrum's peak have no reliable
/// phase and are never retained by the synchro-extracting transform.
pub const SET_MAGNITUDE_FLOOR: f64 = 1e-10;

/// Synchro-extracting transform: a Gaussian-window STFT in which only the
/// coefficients whose instantaneous-frequency estimate lies within
/// `delta_bins` of their own bin are kept.
///
/// The estimate is `k − (T/2π)·Im(X_{g'}(k) / X_g(k))`, i.e. the time
/// derivative of the STFT phase obtained with the derivative window.
pub fn synchro_extract(x: &[f64], window_len: usize, hop: usize, delta_bins: f64) -> Result<Spectrum> {
    if !(delta_bins > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_bins must be positive, got {delta_bins}"
        )));
    }
    let frames = frame_count(x.len(), window_len, hop)?;
    let g = Window::Gaussian.coefficients(window_len);
    let dg = gaussian_derivative(window_len);
    let xg = framed_dft(x, &g, hop, frames);
    let xdg = framed_dft(x, &dg, hop, frames);
    let peak = xg.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = peak * SET_MAGNITUDE_FLOOR;
    let scale = window_len as f64 / (2.0 * PI);
    let mut out = vec![Complex64::default(); xg.len()];
    for (i, (a, b)) in xg.iter().zip(&xdg).enumerate() {
        let mag = a.norm();
        if mag == 0.0 || mag <= floor {
            continue;
        }
        let k = (i / frames) as f64;
        let inst = k - scale * (b / a).im;
        if (inst - k).abs() < delta_bins {
            out[i] = *a;
        }
    }
    Ok(Spectrum {
        kind: TransformKind::Set,
        rows: window_len / 2 + 1,
        cols: frames,
        frame_hop: hop,
        window_len,
        data: SpectrumData::Complex(out),
    })
}

/// Gray image of a spectrum's magnitudes. Pixels hold level indices
/// `0..levels`; a constant spectrum maps to level 0. Width is time, height
/// is frequency.
pub fn spectrum_to_image(s: &Spectrum, log_compress: bool, levels: usize) -> Result<RasterImage> {
    if s.rows == 0 || s.cols == 0 {
        return Err(Error::InvalidParameter("empty spectrum".into()));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!("levels must be in 2..=256, got {levels}")));
    }
    let mut mags = s.magnitudes();
    if log_compress {
        mags.iter_mut().for_each(|m| *m = m.ln_1p());
    }
    let (lo, hi) = mags
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let top = (levels - 1) as f64;
    let pixels = if hi > lo {
        mags.iter().map(|&m| round_to_u8((m - lo) / (hi - lo) * top)).collect()
    } else {
        vec![0; mags.len()]
    };
    RasterImage::new(s.cols, s.rows, 1, pixels)
}

/// Transform parameters used by the feature path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfrSettings {
    pub stft_window: Window,
    pub stft_window_len: usize,
    pub stft_hop: usize,
    pub wvd_window: Window,
    pub wvd_window_len: usize,
    pub set_window_len: usize,
    pub set_hop: usize,
    pub set_delta_bins: f64,
    pub log_compress: bool,
}

impl Default for TfrSettings {
    fn default() -> Self {
        TfrSettings {
            stft_window: Window::Hann,
            stft_window_len: 64,
            stft_hop: 16,
            wvd_window: Window::Hann,
            wvd_window_len: 63,
            set_window_len: 64,
            set_hop: 16,
            set_delta_bins: 1.0,
            log_compress: true,
        }
    }
}

impl TfrSettings {
    pub fn compute(&self, kind: TransformKind, x: &[f64]) -> Result<Spectrum> {
        match kind {
            TransformKind::Stft => stft(x, self.stft_window, self.stft_window_len, self.stft_hop),
            TransformKind::Stockwell => stockwell(x),
            TransformKind::WignerVille => wigner_ville(x, self.wvd_window, self.wvd_window_len),
            TransformKind::Set => synchro_extract(x, self.set_window_len, self.set_hop, self.set_delta_bins),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, cycles: f64) -> Vec<f64> {
        (0..n).map(|t| (2.0 * PI * cycles * t as f64 / n as f64).cos()).collect()
    }

    #[test]
    fn windows_are_symmetric() {
        for w in [Window::Rectangular, Window::Hann, Window::Gaussian] {
            for len in [1usize, 7, 64] {
                let c = w.coefficients(len);
                for i in 0..len {
                    assert!((c[i] - c[len - 1 - i]).abs() < 1e-15);
                }
            }
        }
        assert!(Window::from_name("kaiser").is_err());
        assert_eq!(Window::from_name("Hann").unwrap(), Window::Hann);
    }

    #[test]
    fn stft_of_cosine_single_frame() {
        let t = 32;
        for k0 in [1usize, 5, 11] {
            let s = stft(&tone(t, k0 as f64), Window::Rectangular, t, 1).unwrap();
            assert_eq!((s.rows, s.cols), (17, 1));
            for (k, m) in s.magnitudes().iter().enumerate() {
                if k == k0 {
                    assert!((m - 0.5).abs() < 1e-12);
                } else {
                    assert!(*m < 1e-9, "bin {k}: {m}");
                }
            }
        }
    }

    #[test]
    fn stft_impulse_and_zero() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        let s = stft(&x, Window::Rectangular, 16, 16).unwrap();
        assert!(s.magnitudes().iter().all(|m| (m - 1.0 / 16.0).abs() < 1e-15));
        let z = stft(&[0.0; 64], Window::Hann, 16, 4).unwrap();
        assert_eq!(z.cols, 13);
        assert!(z.magnitudes().iter().all(|&m| m == 0.0));
        assert!(stft(&[0.0; 8], Window::Hann, 16, 4).is_err());
        assert!(stft(&[0.0; 32], Window::Hann, 16, 0).is_err());
    }

    #[test]
    fn stft_parseval_per_frame() {
        let t = 16;
        let x: Vec<f64> = (0..64).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let s = stft(&x, Window::Rectangular, t, t).unwrap();
        let v = s.complex_values().unwrap();
        for f in 0..s.cols {
            let time_energy: f64 = x[f * t..(f + 1) * t].iter().map(|v| v * v).sum::<f64>() / t as f64;
            let freq_energy: f64 = (0..s.rows)
                .map(|k| {
                    let weight = if k == 0 || k == t / 2 { 1.0 } else { 2.0 };
                    weight * v[k * s.cols + f].norm_sqr()
                })
                .sum();
            assert!((time_energy - freq_energy).abs() <= 1e-9 * time_energy);
        }
    }

    #[test]
    fn stockwell_constant_signal() {
        let c = 3.0;
        let s = stockwell(&[c; 64]).unwrap();
        let mags = s.magnitudes();
        assert!(mags[..64].iter().all(|m| (m - c).abs() < 1e-12));
        // The only leakage is the voice Gaussian's tail one voice-width away.
        // At the Nyquist voice both wrapped tails land on DC.
        let bound = 2.02 * c * (-2.0 * PI * PI).exp();
        assert!(mags[64..].iter().all(|&m| m < bound), "{:?}", mags[64..].iter().cloned().fold(0.0, f64::max));
        assert!(stockwell(&[0.0; 32]).unwrap().magnitudes().iter().all(|&m| m == 0.0));
        assert!(stockwell(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn stockwell_tone_peaks_at_its_voice() {
        let n = 64;
        let k0 = 8;
        let s = stockwell(&tone(n, k0 as f64)).unwrap();
        let mags = s.magnitudes();
        for t in 8..n - 8 {
            let best = (0..s.rows).max_by(|&a, &b| mags[a * n + t].total_cmp(&mags[b * n + t])).unwrap();
            assert_eq!(best, k0, "frame {t}");
        }
    }

    #[test]
    fn wvd_validation_and_zero() {
        assert!(wigner_ville(&[0.0; 32], Window::Hann, 8).is_err());
        assert!(wigner_ville(&[0.0; 8], Window::Hann, 9).is_err());
        let z = wigner_ville(&[0.0; 32], Window::Hann, 15).unwrap();
        assert_eq!((z.rows, z.cols), (16, 32));
        assert!(z.real_values().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wvd_tone_peaks_at_nearest_bin() {
        let n = 128;
        let len = 31;
        let bins = wvd_frequency_bins(len);
        for f0 in [0.1, 0.23, 0.35] {
            let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * f0 * t as f64).cos()).collect();
            let s = wigner_ville(&x, Window::Hann, len).unwrap();
            let v = s.real_values().unwrap();
            let expected = (2.0 * bins as f64 * f0).round() as usize;
            for t in len..n - len {
                let best = (0..bins).max_by(|&a, &b| v[a * n + t].abs().total_cmp(&v[b * n + t].abs())).unwrap();
                assert_eq!(best, expected, "f0={f0} t={t}");
            }
        }
    }

    #[test]
    fn wvd_residue_is_tiny_for_real_input() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 31) % 17) as f64 / 17.0 - 0.4).collect();
        for w in [Window::Hann, Window::Gaussian, Window::Rectangular] {
            let raw = wigner_ville_complex(&x, w, 21).unwrap();
            let worst = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "{w:?}: {worst}");
        }
    }

    #[test]
    fn set_keeps_ridge_and_never_adds_energy() {
        let n = 256;
        let x = tone(n, 32.0); // bin 8 of a 64-sample window
        let set = synchro_extract(&x, 64, 16, 1.0).unwrap();
        let reference = stft(&x, Window::Gaussian, 64, 16).unwrap();
        assert!(set.energy() <= reference.energy());
        let v = set.complex_values().unwrap();
        let off_ridge: f64 = (0..set.rows)
            .filter(|&k| (k as f64 - 8.0).abs() > 1.0)
            .flat_map(|k| v[k * set.cols..(k + 1) * set.cols].iter())
            .map(|z| z.norm_sqr())
            .sum();
        assert!(off_ridge < 1e-6 * set.energy(), "{off_ridge}");
        // Gaussian window gain: |X(k0)| = mean(g) / 2.
        let gain = Window::Gaussian.coefficients(64).iter().sum::<f64>() / 64.0 / 2.0;
        assert!((v[8 * set.cols].norm() - gain).abs() < 1e-3);
        let zero = synchro_extract(&[0.0; 128], 32, 8, 1.0).unwrap();
        assert_eq!(zero.energy(), 0.0);
        assert!(synchro_extract(&x, 64, 16, 0.0).is_err());
    }

    #[test]
    fn set_superposes_separated_tones() {
        let n = 256;
        let a = tone(n, 24.0); // bin 6
        let b: Vec<f64> = tone(n, 80.0).iter().map(|v| 0.7 * v).collect(); // bin 20
        let both: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let sa = synchro_extract(&a, 64, 16, 1.0).unwrap();
        let sb = synchro_extract(&b, 64, 16, 1.0).unwrap();
        let sab = synchro_extract(&both, 64, 16, 1.0).unwrap();
        let (va, vb, vab) = (sa.complex_values().unwrap(), sb.complex_values().unwrap(), sab.complex_values().unwrap());
        let cols = sab.cols;
        for f in 0..cols {
            assert!((vab[6 * cols + f] - va[6 * cols + f]).norm() < 1e-3);
            assert!((vab[20 * cols + f] - vb[20 * cols + f]).norm() < 1e-3);
            assert!(vab[6 * cols + f].norm() > 0.1 && vab[20 * cols + f].norm() > 0.07);
        }
    }

    #[test]
    fn image_levels() {
        let zero = stft(&[0.0; 64], Window::Hann, 16, 8).unwrap();
        assert!(spectrum_to_image(&zero, true, 32).unwrap().pixels.iter().all(|&p| p == 0));
        let two = Spectrum {
            kind: TransformKind::WignerVille,
            rows: 2,
            cols: 3,
            frame_hop: 1,
            window_len: 1,
            data: SpectrumData::Real(vec![0.0, 5.0, 0.0, 5.0, 5.0, 0.0]),
        };
        let img = spectrum_to_image(&two, false, 32).unwrap();
        assert_eq!((img.width, img.height), (3, 2));
        assert_eq!(img.pixels, vec![0, 31, 0, 31, 31, 0]);
        assert!(spectrum_to_image(&two, true, 1).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = stft(&tone(64, 3.0), Window::Hann, 16, 8).unwrap();
        let path = dir.path().join("s.bin");
        s.write_dump(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 20 + s.rows * s.cols * 8);
        assert_eq!(&bytes[0..4], &0u32.to_le_bytes());
        let back = Spectrum::read_dump(&path).unwrap();
        assert_eq!((back.kind, back.rows, back.cols, back.frame_hop, back.window_len), (s.kind, s.rows, s.cols, 8, 16));
        assert_eq!(back.magnitudes(), s.magnitudes());
    }
}
