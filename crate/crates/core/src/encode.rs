//! Gramian Angular Summation Field encoding and raster rendering.
//!
//! An epoch is min-max rescaled, mapped to angles `φ = arccos(x̃)` and
//! expanded into the matrix `cos(φᵢ + φⱼ)`. The matrix is then quantized to
//! gray levels or pushed through a 256-entry colormap to give an RGB image.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::util::round_to_u8;
use crate::{Error, Result};

/// Slack allowed outside `[-1, 1]` before `arccos`; values inside it are clamped.
pub const POLAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// `[-1, 1]`
    #[default]
    UnitSigned,
    /// `[0, 1]`
    UnitPositive,
}

/// Min-max rescaling into `[0, 1]` or `[-1, 1]`.
pub fn rescale(samples: &[f64], mode: ScalingMode) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "rescaling needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::DegenerateInput("non-finite sample".into()));
    }
    if max <= min {
        return Err(Error::DegenerateInput("constant signal (max == min)".into()));
    }
    let range = max - min;
    Ok(match mode {
        ScalingMode::UnitPositive => samples.iter().map(|&v| (v - min) / range).collect(),
        ScalingMode::UnitSigned => samples.iter().map(|&v| ((v - max) + (v - min)) / range).collect(),
    })
}

/// `φᵢ = arccos(x̃ᵢ)`, in `[0, π]`.
pub fn to_polar(scaled: &[f64]) -> Result<Vec<f64>> {
    scaled
        .iter()
        .map(|&v| {
            if !(v >= -1.0 - POLAR_TOLERANCE && v <= 1.0 + POLAR_TOLERANCE) {
                return Err(Error::OutOfRange { value: v });
            }
            Ok(v.clamp(-1.0, 1.0).acos())
        })
        .collect()
}

/// Square, symmetric GASF matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GafMatrix {
    pub size: usize,
    pub values: Vec<f64>,
    pub scaling_mode: ScalingMode,
}

impl GafMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    /// Rescales, converts to polar form and builds the field in one step.
    pub fn from_samples(samples: &[f64], mode: ScalingMode) -> Result<Self> {
        let scaled = rescale(samples, mode)?;
        let mut m = gasf_matrix(&scaled)?;
        m.scaling_mode = mode;
        Ok(m)
    }
}

/// `values[i][j] = cos(φᵢ + φⱼ)` for already-scaled input.
pub fn gasf_matrix(scaled: &[f64]) -> Result<GafMatrix> {
    let phi = to_polar(scaled)?;
    let n = phi.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = (2.0 * phi[i]).cos();
        for j in (i + 1)..n {
            let v = (phi[i] + phi[j]).cos();
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(GafMatrix {
        size: n,
        values,
        scaling_mode: ScalingMode::UnitSigned,
    })
}

/// 8-bit raster, row-major, channel-interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("raster dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!("unsupported channel count {channels}")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer of {} bytes does not match {width}x{height}x{channels}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        RasterImage {
            width,
            height,
            channels,
            pixels: vec![0; width * height * channels],
        }
    }

    pub fn pixel(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + channel]
    }

    /// Pixels scaled to `[0, 1]` in HWC order, ready for a network input.
    pub fn to_unit_f64(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| p as f64 / 255.0).collect()
    }

    pub fn from_unit_f64(width: usize, height: usize, channels: usize, data: &[f64]) -> Result<Self> {
        RasterImage::new(
            width,
            height,
            channels,
            data.iter().map(|&v| round_to_u8(v * 255.0)).collect(),
        )
    }

    /// 8-bit non-interlaced PNG, gray or RGB.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let color = match self.channels {
            1 => image::ExtendedColorType::L8,
            _ => image::ExtendedColorType::Rgb8,
        };
        image::save_buffer(
            path.as_ref(),
            &self.pixels,
            self.width as u32,
            self.height as u32,
            color,
        )?;
        Ok(())
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?;
        match img.color().channel_count() {
            1 | 2 => {
                let g = img.to_luma8();
                RasterImage::new(g.width() as usize, g.height() as usize, 1, g.into_raw())
            }
            _ => {
                let rgb = img.to_rgb8();
                RasterImage::new(rgb.width() as usize, rgb.height() as usize, 3, rgb.into_raw())
            }
        }
    }
}

/// Quantizes `[-1, 1]` into `levels` gray values. With fewer than 256 levels
/// the level index is stretched back onto `0..=255`.
pub fn quantize_gray(m: &GafMatrix, levels: usize) -> Result<RasterImage> {
    let pixels = quantize_levels(m, levels)?
        .into_iter()
        .map(|q| stretch_level(q, levels))
        .collect();
    RasterImage::new(m.size, m.size, 1, pixels)
}

/// Raw level indices `0..levels`, one per matrix entry.
pub fn quantize_levels(m: &GafMatrix, levels: usize) -> Result<Vec<u8>> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!("levels must be in 2..=256, got {levels}")));
    }
    let top = (levels - 1) as f64;
    Ok(m
        .values
        .iter()
        .map(|&v| round_to_u8(((v.clamp(-1.0, 1.0) + 1.0) / 2.0) * top))
        .collect())
}

pub(crate) fn stretch_level(q: u8, levels: usize) -> u8 {
    if levels >= 256 {
        q
    } else {
        round_to_u8(q as f64 * 255.0 / (levels - 1) as f64)
    }
}

/// 256-entry RGB lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    pub name: String,
    pub table: Vec<[u8; 3]>,
}

const COLORMAP_ASSETS: &[(&str, &str)] = &[
    ("jet", include_str!("../assets/colormaps/jet.csv")),
    ("gray", include_str!("../assets/colormaps/gray.csv")),
    ("hot", include_str!("../assets/colormaps/hot.csv")),
    ("viridis", include_str!("../assets/colormaps/viridis.csv")),
];

pub const DEFAULT_COLORMAP: &str = "jet";

impl Colormap {
    pub fn parse_csv(name: &str, text: &str) -> Result<Colormap> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = Vec::with_capacity(256);
        for record in reader.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::InvalidParameter(format!("colormap `{name}` row needs 3 columns")));
            }
            let mut rgb = [0u8; 3];
            for (slot, field) in rgb.iter_mut().zip(record.iter()) {
                *slot = field.parse().map_err(|_| {
                    Error::InvalidParameter(format!("colormap `{name}`: bad entry `{field}`"))
                })?;
            }
            table.push(rgb);
        }
        if table.len() != 256 {
            return Err(Error::InvalidParameter(format!(
                "colormap `{name}` has {} entries, expected 256",
                table.len()
            )));
        }
        Ok(Colormap {
            name: name.to_string(),
            table,
        })
    }

    /// Looks up one of the bundled tables by name.
    pub fn builtin(name: &str) -> Result<&'static Colormap> {
        static TABLES: OnceLock<Vec<Colormap>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            COLORMAP_ASSETS
                .iter()
                .map(|(name, text)| Colormap::parse_csv(name, text).expect("bundled colormap is valid"))
                .collect()
        });
        tables
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownColormap(name.to_string()))
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        COLORMAP_ASSETS.iter().map(|(n, _)| *n)
    }
}

/// Pseudocolor rendering: `colormap[quantize(v, 256)]`.
pub fn render_rgb(m: &GafMatrix, colormap: &str) -> Result<RasterImage> {
    let cmap = Colormap::builtin(colormap)?;
    let levels = quantize_levels(m, 256)?;
    let mut pixels = Vec::with_capacity(levels.len() * 3);
    for q in levels {
        pixels.extend_from_slice(&cmap.table[q as usize]);
    }
    RasterImage::new(m.size, m.size, 3, pixels)
}

/// Affine augmentation about the image center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentParams {
    /// Counter-clockwise as displayed (y axis pointing down).
    pub rotation_deg: f64,
    pub shift_px: (i64, i64),
    /// Horizontal shear factor: `x' = x + shear·y`.
    pub shear: f64,
}

impl AugmentParams {
    pub fn is_identity(&self) -> bool {
        self.rotation_deg == 0.0 && self.shift_px == (0, 0) && self.shear == 0.0
    }
}

/// Rotation, shear and shift with nearest-neighbour resampling. Destination
/// pixels whose source falls outside the image are zero.
pub fn augment_image(img: &RasterImage, params: &AugmentParams) -> Result<RasterImage> {
    if img.pixels.is_empty() {
        return Err(Error::InvalidParameter("cannot augment an empty image".into()));
    }
    if params.is_identity() {
        return Ok(img.clone());
    }
    let (w, h, c) = (img.width, img.height, img.channels);
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let theta = params.rotation_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let k = params.shear;
    let mut out = RasterImage::zeros(w, h, c);
    for y in 0..h {
        for x in 0..w {
            // Undo the shift, the rotation, then the shear.
            let u = x as f64 - cx - params.shift_px.0 as f64;
            let v = y as f64 - cy - params.shift_px.1 as f64;
            let ru = cos * u - sin * v;
            let rv = sin * u + cos * v;
            let sx = ru - k * rv + cx;
            let sy = rv + cy;
            let (sx, sy) = (sx.round(), sy.round());
            if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                continue;
            }
            let src = (sy as usize * w + sx as usize) * c;
            let dst = (y * w + x) * c;
            out.pixels[dst..dst + c].copy_from_slice(&img.pixels[src..src + c]);
        }
    }
    Ok(out)
}

/// Bilinear resize with pixel-center alignment and edge clamping.
pub fn resize_image(img: &RasterImage, out_w: usize, out_h: usize) -> Result<RasterImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParameter("output size must be at least 1x1".into()));
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let c = img.channels;
    let axis = |out: usize, len: usize| -> Vec<(usize, usize, f64)> {
        let scale = len as f64 / out as f64;
        (0..out)
            .map(|i| {
                let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(len - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let xs = axis(out_w, img.width);
    let ys = axis(out_h, img.height);
    let mut pixels = Vec::with_capacity(out_w * out_h * c);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let p = |x: usize, y: usize| img.pixel(x, y, ch) as f64;
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                pixels.push(round_to_u8(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    RasterImage::new(out_w, out_h, c, pixels)
}
