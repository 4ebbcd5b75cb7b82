//! Gray-level co-occurrence statistics, box-counting fractal dimension and
//! the ten-entry per-epoch texture feature vector.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encode::{self, RasterImage, ScalingMode};
use crate::tfr::{spectrum_to_image, TfrSettings, TransformKind};
use crate::{Class, Error, Result};

/// Normalized co-occurrence matrix, `values[i * levels + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    pub levels: usize,
    pub offset: (i64, i64),
    pub symmetric: bool,
    pub values: Vec<f64>,
}

impl CooccurrenceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.levels + j]
    }
}

/// Counts gray pairs `(img[y][x], img[y+dy][x+dx])`, optionally adds the
/// transpose, and normalizes to unit mass. `dy` grows downwards.
pub fn glcm(img: &RasterImage, offset: (i64, i64), levels: usize, symmetric: bool) -> Result<CooccurrenceMatrix> {
    if img.channels != 1 {
        return Err(Error::InvalidParameter("GLCM needs a single-channel image".into()));
    }
    if offset == (0, 0) {
        return Err(Error::InvalidParameter("GLCM offset must be non-zero".into()));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!("levels must be in 2..=256, got {levels}")));
    }
    if let Some(&p) = img.pixels.iter().find(|&&p| p as usize >= levels) {
        return Err(Error::InvalidParameter(format!(
            "pixel value {p} is not below {levels} levels"
        )));
    }
    let (w, h) = (img.width as i64, img.height as i64);
    let (dx, dy) = offset;
    let mut counts = vec![0u64; levels * levels];
    let mut pairs = 0u64;
    for y in 0.max(-dy)..h.min(h - dy) {
        for x in 0.max(-dx)..w.min(w - dx) {
            let a = img.pixels[(y * w + x) as usize] as usize;
            let b = img.pixels[((y + dy) * w + x + dx) as usize] as usize;
            counts[a * levels + b] += 1;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::InvalidParameter(format!(
            "offset {offset:?} leaves no pixel pairs in a {w}x{h} image"
        )));
    }
    let mut values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut total = pairs as f64;
    if symmetric {
        let original = values.clone();
        for i in 0..levels {
            for j in 0..levels {
                values[i * levels + j] += original[j * levels + i];
            }
        }
        total *= 2.0;
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(CooccurrenceMatrix {
        levels,
        offset,
        symmetric,
        values,
    })
}

/// The co-occurrence statistics used by the feature vector. Indices are
/// 0-based gray levels; entropies are in bits with `0·log 0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HaralickFeatures {
    pub contrast: f64,
    pub homogeneity: f64,
    pub autocorrelation: f64,
    pub cluster_shade: f64,
    pub cluster_prominence: f64,
    pub sum_average: f64,
    pub sum_entropy: f64,
    pub difference_variance: f64,
    /// Information measure of correlation 1: `(HXY − HXY1) / max(HX, HY)`.
    pub info_measure_corr1: f64,
}

impl HaralickFeatures {
    pub const NAMES: [&'static str; 9] = [
        "contrast",
        "homogeneity",
        "autocorrelation",
        "cluster_shade",
        "cluster_prominence",
        "sum_average",
        "sum_entropy",
        "difference_variance",
        "info_measure_corr1",
    ];

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.contrast,
            self.homogeneity,
            self.autocorrelation,
            self.cluster_shade,
            self.cluster_prominence,
            self.sum_average,
            self.sum_entropy,
            self.difference_variance,
            self.info_measure_corr1,
        ]
    }

    fn from_array(a: [f64; 9]) -> Self {
        HaralickFeatures {
            contrast: a[0],
            homogeneity: a[1],
            autocorrelation: a[2],
            cluster_shade: a[3],
            cluster_prominence: a[4],
            sum_average: a[5],
            sum_entropy: a[6],
            difference_variance: a[7],
            info_measure_corr1: a[8],
        }
    }

    /// Element-wise mean, used to average over offsets.
    pub fn mean(items: &[HaralickFeatures]) -> HaralickFeatures {
        let mut acc = [0.0; 9];
        for f in items {
            for (a, v) in acc.iter_mut().zip(f.to_array()) {
                *a += v;
            }
        }
        let n = items.len().max(1) as f64;
        HaralickFeatures::from_array(acc.map(|a| a / n))
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::NAMES.into_iter().zip(self.to_array())
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

pub fn haralick(p: &CooccurrenceMatrix) -> HaralickFeatures {
    let l = p.levels;
    let mut px = vec![0.0; l];
    let mut py = vec![0.0; l];
    let mut p_sum = vec![0.0; 2 * l - 1];
    let mut p_diff = vec![0.0; l];
    let mut f = HaralickFeatures::default();
    let mut hxy = 0.0;
    for i in 0..l {
        for j in 0..l {
            let v = p.get(i, j);
            if v == 0.0 {
                continue;
            }
            let d = i.abs_diff(j);
            px[i] += v;
            py[j] += v;
            p_sum[i + j] += v;
            p_diff[d] += v;
            f.contrast += (d * d) as f64 * v;
            f.homogeneity += v / (1.0 + (d * d) as f64);
            f.autocorrelation += (i * j) as f64 * v;
            hxy -= plogp(v);
        }
    }
    let mu_x: f64 = px.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let mu_y: f64 = py.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
    let mut hxy1 = 0.0;
    for i in 0..l {
        for j in 0..l {
            let v = p.get(i, j);
            if v == 0.0 {
                continue;
            }
            let c = i as f64 + j as f64 - mu_x - mu_y;
            f.cluster_shade += c.powi(3) * v;
            f.cluster_prominence += c.powi(4) * v;
            hxy1 -= v * (px[i] * py[j]).log2();
        }
    }
    f.sum_average = p_sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    f.sum_entropy = -p_sum.iter().map(|&v| plogp(v)).sum::<f64>();
    let mu_d: f64 = p_diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    f.difference_variance = p_diff
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - mu_d).powi(2) * v)
        .sum();
    let hx = -px.iter().map(|&v| plogp(v)).sum::<f64>();
    let hy = -py.iter().map(|&v| plogp(v)).sum::<f64>();
    let denom = hx.max(hy);
    f.info_measure_corr1 = if denom > 0.0 { (hxy - hxy1) / denom } else { 0.0 };
    f
}

/// Otsu's threshold on the 8-bit histogram. Pixels `<= t` are background.
pub fn otsu_threshold(img: &RasterImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in &img.pixels {
        hist[p as usize] += 1;
    }
    let total = img.pixels.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w_bg, mut sum_bg) = (0.0, 0.0);
    let (mut best_t, mut best_var) = (0u8, -1.0);
    for (t, &c) in hist.iter().enumerate() {
        w_bg += c as f64;
        sum_bg += t as f64 * c as f64;
        let w_fg = total - w_bg;
        if w_bg == 0.0 || w_fg == 0.0 {
            continue;
        }
        let diff = sum_bg / w_bg - (sum_all - sum_bg) / w_fg;
        let var = w_bg * w_fg * diff * diff;
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    if best_var < 0.0 {
        // Single-valued histogram: everything is background.
        img.pixels.first().copied().unwrap_or(0)
    } else {
        best_t
    }
}

/// Box-counting dimension of the pixels strictly above `threshold`.
///
/// Box sizes are `2, 4, 8, …` up to half the shorter side; the result is the
/// negated least-squares slope of `ln(count)` against `ln(size)`.
pub fn fractal_dimension(img: &RasterImage, threshold: u8) -> Result<f64> {
    if img.channels != 1 {
        return Err(Error::InvalidParameter("fractal dimension needs a gray image".into()));
    }
    let (w, h) = (img.width, img.height);
    if w < 8 || h < 8 {
        return Err(Error::InvalidParameter(format!("image {w}x{h} is smaller than 8x8")));
    }
    let fg: Vec<bool> = img.pixels.iter().map(|&p| p > threshold).collect();
    if !fg.iter().any(|&b| b) {
        return Err(Error::DegenerateInput(format!(
            "no foreground pixels above threshold {threshold}"
        )));
    }
    let mut points = Vec::new();
    let mut size = 2;
    while size <= w.min(h) / 2 {
        let (bw, bh) = (w.div_ceil(size), h.div_ceil(size));
        let mut occupied = vec![false; bw * bh];
        for y in 0..h {
            for x in 0..w {
                if fg[y * w + x] {
                    occupied[(y / size) * bw + x / size] = true;
                }
            }
        }
        let count = occupied.iter().filter(|&&o| o).count();
        points.push(((size as f64).ln(), (count as f64).ln()));
        size *= 2;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// The ten texture features, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub st_cluster_shade: f64,
    pub st_sum_entropy: f64,
    pub wvt_contrast: f64,
    pub wvt_fractal_dimension: f64,
    pub wvt_difference_variance: f64,
    pub set_autocorrelation: f64,
    pub set_sum_average: f64,
    pub stft_cluster_prominence: f64,
    pub stft_info_measure_corr1: f64,
    pub stft_homogeneity: f64,
}

pub const FEATURE_COUNT: usize = 10;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "st_cluster_shade",
    "st_sum_entropy",
    "wvt_contrast",
    "wvt_fractal_dimension",
    "wvt_difference_variance",
    "set_autocorrelation",
    "set_sum_average",
    "stft_cluster_prominence",
    "stft_info_measure_corr1",
    "stft_homogeneity",
];

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.st_cluster_shade,
            self.st_sum_entropy,
            self.wvt_contrast,
            self.wvt_fractal_dimension,
            self.wvt_difference_variance,
            self.set_autocorrelation,
            self.set_sum_average,
            self.stft_cluster_prominence,
            self.stft_info_measure_corr1,
            self.stft_homogeneity,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            st_cluster_shade: a[0],
            st_sum_entropy: a[1],
            wvt_contrast: a[2],
            wvt_fractal_dimension: a[3],
            wvt_difference_variance: a[4],
            set_autocorrelation: a[5],
            set_sum_average: a[6],
            stft_cluster_prominence: a[7],
            stft_info_measure_corr1: a[8],
            stft_homogeneity: a[9],
        }
    }
}

/// Where the texture images come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Each feature from its own time-frequency spectrum.
    #[default]
    Transforms,
    /// All ten features from the epoch's GASF image.
    Gasf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlcmSettings {
    pub levels: usize,
    pub offsets: Vec<(i64, i64)>,
    pub symmetric: bool,
}

impl Default for GlcmSettings {
    fn default() -> Self {
        GlcmSettings {
            levels: 32,
            offsets: vec![(1, 0), (0, 1), (1, 1), (1, -1)],
            symmetric: true,
        }
    }
}

impl GlcmSettings {
    /// Statistics averaged over every configured offset.
    pub fn features(&self, img: &RasterImage) -> Result<HaralickFeatures> {
        if self.offsets.is_empty() {
            return Err(Error::InvalidParameter("no GLCM offsets configured".into()));
        }
        let per_offset = self
            .offsets
            .iter()
            .map(|&o| glcm(img, o, self.levels, self.symmetric).map(|p| haralick(&p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(HaralickFeatures::mean(&per_offset))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSettings {
    pub tfr: TfrSettings,
    pub glcm: GlcmSettings,
    pub source: FeatureSource,
    pub scaling: ScalingMode,
}

fn level_image_to_8bit(img: &RasterImage, levels: usize) -> RasterImage {
    RasterImage {
        pixels: img.pixels.iter().map(|&q| encode::stretch_level(q, levels)).collect(),
        ..img.clone()
    }
}

fn fractal_with_otsu(img: &RasterImage) -> Result<f64> {
    fractal_dimension(img, otsu_threshold(img))
}

/// Runs the transforms, images each spectrum and collects the ten features:
/// ST → cluster shade, sum entropy; WVD → contrast, fractal dimension,
/// difference variance; SET → autocorrelation, sum average; STFT → cluster
/// prominence, IMC1, homogeneity.
pub fn assemble_feature_vector(samples: &[f64], settings: &FeatureSettings) -> Result<FeatureVector> {
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::DegenerateInput("constant or empty epoch".into()));
    }
    let levels = settings.glcm.levels;
    match settings.source {
        FeatureSource::Transforms => {
            let image_of = |kind: TransformKind| -> Result<RasterImage> {
                let s = settings.tfr.compute(kind, samples)?;
                spectrum_to_image(&s, settings.tfr.log_compress, levels)
            };
            let st = settings.glcm.features(&image_of(TransformKind::Stockwell)?)?;
            let wvt_img = image_of(TransformKind::WignerVille)?;
            let wvt = settings.glcm.features(&wvt_img)?;
            let set = settings.glcm.features(&image_of(TransformKind::Set)?)?;
            let stft = settings.glcm.features(&image_of(TransformKind::Stft)?)?;
            Ok(FeatureVector {
                st_cluster_shade: st.cluster_shade,
                st_sum_entropy: st.sum_entropy,
                wvt_contrast: wvt.contrast,
                wvt_fractal_dimension: fractal_with_otsu(&level_image_to_8bit(&wvt_img, levels))?,
                wvt_difference_variance: wvt.difference_variance,
                set_autocorrelation: set.autocorrelation,
                set_sum_average: set.sum_average,
                stft_cluster_prominence: stft.cluster_prominence,
                stft_info_measure_corr1: stft.info_measure_corr1,
                stft_homogeneity: stft.homogeneity,
            })
        }
        FeatureSource::Gasf => {
            let m = encode::GafMatrix::from_samples(samples, settings.scaling)?;
            let img = RasterImage::new(m.size, m.size, 1, encode::quantize_levels(&m, levels)?)?;
            let h = settings.glcm.features(&img)?;
            Ok(FeatureVector {
                st_cluster_shade: h.cluster_shade,
                st_sum_entropy: h.sum_entropy,
                wvt_contrast: h.contrast,
                wvt_fractal_dimension: fractal_with_otsu(&encode::quantize_gray(&m, 256)?)?,
                wvt_difference_variance: h.difference_variance,
                set_autocorrelation: h.autocorrelation,
                set_sum_average: h.sum_average,
                stft_cluster_prominence: h.cluster_prominence,
                stft_info_measure_corr1: h.info_measure_corr1,
                stft_homogeneity: h.homogeneity,
            })
        }
    }
}

/// Feature table: canonical names plus `label`, 17 significant digits.
pub fn write_feature_csv(path: impl AsRef<Path>, rows: &[(FeatureVector, Class)]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("label");
    w.write_record(&header)?;
    for (features, label) in rows {
        let mut record: Vec<String> = features.to_array().iter().map(|v| format!("{v:.16e}")).collect();
        record.push(label.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<Vec<(FeatureVector, Class)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidParameter(format!(
            "{}: unexpected feature header {:?}",
            path.display(),
            header
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let mut values = [0.0; FEATURE_COUNT];
        for (c, slot) in values.iter_mut().enumerate() {
            let token = &record[c];
            *slot = token.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                row: i + 2,
                column: c + 1,
                token: token.to_string(),
            })?;
        }
        rows.push((FeatureVector::from_array(values), record[FEATURE_COUNT].parse()?));
    }
    Ok(rows)
}
