//! Per-frame color features and per-video aggregation.
//!
//! Ten scalar features per frame: mean RGB channels, circular-mean hue,
//! mean saturation and value, perceived brightness mean and standard
//! deviation, trimmed-range contrast, and the Hasler–Süsstrunk
//! colorfulness metric. Per video, each feature is reduced to median,
//! sample variance and mean, plus a lag-1 autocorrelation of the
//! brightness series.

use crate::ingest::{Frame, Segment};
use crate::par;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ColorFeatError {
    #[error("empty feature sequence")]
    EmptySequence,
    #[error("color lag needs at least 3 frames, got {0}")]
    TooShortForLag(usize),
}

/// Canonical feature order used by [`FrameFeatures::values`] and the
/// 20-element model feature vector.
pub const FEATURE_NAMES: [&str; 10] = [
    "rgb_red",
    "rgb_green",
    "rgb_blue",
    "hue",
    "saturation",
    "value",
    "brightness",
    "brightness_sd",
    "contrast",
    "colorfulness",
];

// CSV variance block lists contrast/colorfulness before the brightness
// pair; the median and mean blocks list them after. Indices into
// FEATURE_NAMES.
const VAR_BLOCK: [usize; 10] = [0, 1, 2, 3, 4, 5, 8, 9, 6, 7];
const MEDIAN_BLOCK: [usize; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Per-pixel brightness model. The default is the HSP-style
/// sqrt-of-weighted-squares estimate; Rec.601 luma is available as an
/// alternate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BrightnessModel {
    #[default]
    Hsp,
    Rec601,
}

#[derive(Debug, Clone, Copy)]
pub struct ColorOptions {
    /// Report hue on [0,180) instead of [0,360), matching tooling that
    /// stores hue in half degrees.
    pub hue_half_scale: bool,
    /// Fraction trimmed from each brightness tail before taking the
    /// contrast range.
    pub contrast_trim: f64,
    pub brightness_model: BrightnessModel,
}

impl Default for ColorOptions {
    fn default() -> Self {
        ColorOptions {
            hue_half_scale: false,
            contrast_trim: 0.01,
            brightness_model: BrightnessModel::Hsp,
        }
    }
}

/// The ten per-frame scalar color features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeatures {
    pub rgb_red: f64,
    pub rgb_green: f64,
    pub rgb_blue: f64,
    /// Circular mean hue in degrees, [0,360) (or [0,180) in half-scale mode).
    pub hue: f64,
    pub saturation: f64,
    pub value: f64,
    pub brightness: f64,
    pub brightness_sd: f64,
    pub contrast: f64,
    pub colorfulness: f64,
}

impl FrameFeatures {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.rgb_red,
            self.rgb_green,
            self.rgb_blue,
            self.hue,
            self.saturation,
            self.value,
            self.brightness,
            self.brightness_sd,
            self.contrast,
            self.colorfulness,
        ]
    }
}

/// Per-video aggregates over one segment, indexed by [`FEATURE_NAMES`].
#[derive(Debug, Clone)]
pub struct VideoFeatures {
    pub medians: [f64; 10],
    pub variances: [f64; 10],
    pub means: [f64; 10],
    /// Lag-1 autocorrelation of the brightness series; absent below 3 frames.
    pub color_lag: Option<f64>,
    pub segment: Segment,
    pub n_frames: usize,
}

/// Hexcone RGB→HSV with hue in degrees [0,360) and saturation/value on
/// the [0,255] scale.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let v = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let c = v - min;
    let s = if v == 0.0 { 0.0 } else { 255.0 * c / v };
    let h = if c == 0.0 {
        0.0
    } else if v == rf {
        60.0 * ((gf - bf) / c).rem_euclid(6.0)
    } else if v == gf {
        60.0 * ((bf - rf) / c + 2.0)
    } else {
        60.0 * ((rf - gf) / c + 4.0)
    };
    (h.rem_euclid(360.0), s, v)
}

/// Inverse of [`rgb_to_hsv`], rounding to the nearest channel value.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let c = v * s / 255.0;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let clamp = |t: f64| (t + m).round().clamp(0.0, 255.0) as u8;
    (clamp(r1), clamp(g1), clamp(b1))
}

/// Per-pixel perceived brightness on [0,255].
pub fn brightness_px(r: u8, g: u8, b: u8, model: BrightnessModel) -> f64 {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    match model {
        BrightnessModel::Hsp => (0.241 * rf * rf + 0.691 * gf * gf + 0.068 * bf * bf).sqrt(),
        BrightnessModel::Rec601 => 0.299 * rf + 0.587 * gf + 0.114 * bf,
    }
}

/// Mean and population standard deviation of per-pixel perceived brightness.
pub fn perceived_brightness(frame: &Frame, model: BrightnessModel) -> (f64, f64) {
    assert!(frame.pixel_count() > 0, "empty frame");
    let n = frame.pixel_count() as f64;
    let mut sum = 0.0;
    for (r, g, b) in frame.rgb_iter() {
        sum += brightness_px(r, g, b, model);
    }
    let mean = sum / n;
    // second pass over deviations avoids the E[x²]−E[x]² cancellation,
    // which otherwise leaves a nonzero sd on uniform frames
    let mut ss = 0.0;
    for (r, g, b) in frame.rgb_iter() {
        let d = brightness_px(r, g, b, model) - mean;
        ss += d * d;
    }
    (mean, (ss / n).sqrt())
}

/// Trimmed brightness range: after sorting per-pixel brightness, drop
/// `floor(trim * n)` pixels from each tail and return max − min of the rest.
pub fn contrast(frame: &Frame, trim: f64, model: BrightnessModel) -> f64 {
    assert!(frame.pixel_count() > 0, "empty frame");
    assert!((0.0..0.5).contains(&trim), "trim must be in [0, 0.5)");
    let mut ys: Vec<f32> = frame
        .rgb_iter()
        .map(|(r, g, b)| brightness_px(r, g, b, model) as f32)
        .collect();
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    trimmed_range(&ys, trim)
}

fn trimmed_range(sorted: &[f32], trim: f64) -> f64 {
    let n = sorted.len();
    let cut = ((trim * n as f64).floor() as usize).min((n - 1) / 2);
    (sorted[n - 1 - cut] - sorted[cut]) as f64
}

/// Same result as [`trimmed_range`] on the sorted slice, via two O(n)
/// selections instead of a sort.
fn trimmed_range_select(values: &mut [f32], trim: f64) -> f64 {
    let n = values.len();
    let cut = ((trim * n as f64).floor() as usize).min((n - 1) / 2);
    if n == 1 {
        return 0.0;
    }
    let cmp = |a: &f32, b: &f32| a.partial_cmp(b).unwrap();
    let (_, hi, _) = values.select_nth_unstable_by(n - 1 - cut, cmp);
    let hi = *hi;
    let (_, lo, _) = values[..n - cut].select_nth_unstable_by(cut, cmp);
    (hi - *lo) as f64
}

/// Hasler–Süsstrunk colorfulness: with per-pixel opponent components
/// rg = R − G and yb = (R + G)/2 − B,
/// M = sqrt(σ²_rg + σ²_yb) + 0.3·sqrt(μ²_rg + μ²_yb) (population σ).
pub fn colorfulness(frame: &Frame) -> f64 {
    assert!(frame.pixel_count() > 0, "empty frame");
    let mut s_rg = 0.0;
    let mut s_rg2 = 0.0;
    let mut s_yb = 0.0;
    let mut s_yb2 = 0.0;
    for (r, g, b) in frame.rgb_iter() {
        let rg = r as f64 - g as f64;
        let yb = 0.5 * (r as f64 + g as f64) - b as f64;
        s_rg += rg;
        s_rg2 += rg * rg;
        s_yb += yb;
        s_yb2 += yb * yb;
    }
    let n = frame.pixel_count() as f64;
    let mu_rg = s_rg / n;
    let mu_yb = s_yb / n;
    let var_rg = (s_rg2 / n - mu_rg * mu_rg).max(0.0);
    let var_yb = (s_yb2 / n - mu_yb * mu_yb).max(0.0);
    (var_rg + var_yb).sqrt() + 0.3 * (mu_rg * mu_rg + mu_yb * mu_yb).sqrt()
}

// Hue takes one of finitely many values: it is determined by which
// channel holds the max, the signed difference of the other two, and the
// integer chroma. Trig per pixel dominates extraction cost, so the unit
// vectors are precomputed once, with entries evaluated through exactly
// the same expressions as [`rgb_to_hsv`] to keep results bit-identical.
static HUE_VECTORS: std::sync::OnceLock<Box<[(f64, f64)]>> = std::sync::OnceLock::new();

#[inline]
fn hue_table_index(case: usize, diff: i32, c: i32) -> usize {
    ((case * 511 + (diff + 255) as usize) * 255) + (c - 1) as usize
}

fn hue_vectors() -> &'static [(f64, f64)] {
    HUE_VECTORS.get_or_init(|| {
        let mut table = vec![(0.0, 0.0); 3 * 511 * 255];
        for case in 0..3usize {
            for diff in -255i32..=255 {
                for c in 1i32..=255 {
                    if diff.abs() > c {
                        continue;
                    }
                    let ratio = diff as f64 / c as f64;
                    let h = match case {
                        0 => 60.0 * ratio.rem_euclid(6.0),
                        1 => 60.0 * (ratio + 2.0),
                        _ => 60.0 * (ratio + 4.0),
                    };
                    table[hue_table_index(case, diff, c)] = h.to_radians().sin_cos();
                }
            }
        }
        table.into_boxed_slice()
    })
}

/// All ten features of one frame in a single pass over the pixels.
/// Accumulation is sequential in f64, so results do not depend on how
/// frames are distributed over threads.
pub fn frame_features(frame: &Frame, opts: &ColorOptions) -> FrameFeatures {
    assert!(frame.pixel_count() > 0, "empty frame");
    let n = frame.pixel_count() as f64;
    let mut sum_r = 0.0;
    let mut sum_g = 0.0;
    let mut sum_b = 0.0;
    let mut sum_s = 0.0;
    let mut sum_v = 0.0;
    let mut hue_sin = 0.0;
    let mut hue_cos = 0.0;
    let mut bright_sum = 0.0;
    let mut s_rg = 0.0;
    let mut s_rg2 = 0.0;
    let mut s_yb = 0.0;
    let mut s_yb2 = 0.0;
    let mut brights: Vec<f64> = Vec::with_capacity(frame.pixel_count());

    let hue_table = hue_vectors();
    for (r, g, b) in frame.rgb_iter() {
        sum_r += r as f64;
        sum_g += g as f64;
        sum_b += b as f64;
        let v = r.max(g).max(b);
        let min = r.min(g).min(b);
        let c = (v - min) as i32;
        sum_v += v as f64;
        if c > 0 {
            sum_s += 255.0 * c as f64 / v as f64;
            // branch order mirrors rgb_to_hsv so ties resolve identically
            let (case, diff) = if v == r {
                (0, g as i32 - b as i32)
            } else if v == g {
                (1, b as i32 - r as i32)
            } else {
                (2, r as i32 - g as i32)
            };
            let (sin, cos) = hue_table[hue_table_index(case, diff, c)];
            hue_sin += sin;
            hue_cos += cos;
        } else {
            // gray pixel: hue 0 by convention, saturation 0
            hue_cos += 1.0;
        }
        let y = brightness_px(r, g, b, opts.brightness_model);
        bright_sum += y;
        brights.push(y);
        let rg = r as f64 - g as f64;
        let yb = 0.5 * (r as f64 + g as f64) - b as f64;
        s_rg += rg;
        s_rg2 += rg * rg;
        s_yb += yb;
        s_yb2 += yb * yb;
    }

    // circular hue mean; a vanishing resultant means hue is undefined → 0
    let resultant = (hue_sin * hue_sin + hue_cos * hue_cos).sqrt() / n;
    let mut hue = if resultant < 1e-12 {
        0.0
    } else {
        hue_sin.atan2(hue_cos).to_degrees().rem_euclid(360.0)
    };
    if hue >= 360.0 {
        hue = 0.0;
    }
    if opts.hue_half_scale {
        hue /= 2.0;
    }

    let bright_mean = bright_sum / n;
    // deviation pass instead of E[x²]−E[x]², matching perceived_brightness
    let mut bright_ss = 0.0;
    for &y in &brights {
        let d = y - bright_mean;
        bright_ss += d * d;
    }
    let bright_sd = (bright_ss / n).sqrt();

    // selection is enough for the trimmed range; a full sort dominates
    // the per-frame cost otherwise
    let mut brights32: Vec<f32> = brights.iter().map(|&y| y as f32).collect();
    let contrast = trimmed_range_select(&mut brights32, opts.contrast_trim);

    let mu_rg = s_rg / n;
    let mu_yb = s_yb / n;
    let var_rg = (s_rg2 / n - mu_rg * mu_rg).max(0.0);
    let var_yb = (s_yb2 / n - mu_yb * mu_yb).max(0.0);
    let colorfulness = (var_rg + var_yb).sqrt() + 0.3 * (mu_rg * mu_rg + mu_yb * mu_yb).sqrt();

    FrameFeatures {
        rgb_red: sum_r / n,
        rgb_green: sum_g / n,
        rgb_blue: sum_b / n,
        hue,
        saturation: sum_s / n,
        value: sum_v / n,
        brightness: bright_mean,
        brightness_sd: bright_sd,
        contrast,
        colorfulness,
    }
}

/// Feature extraction over many frames, parallel when the `parallel`
/// feature is enabled. Output order follows input order.
pub fn features_for_frames(frames: &[Frame], opts: &ColorOptions) -> Vec<FrameFeatures> {
    par::map_ordered(frames, |f| frame_features(f, opts))
}

/// Sequential twin of [`features_for_frames`] for benchmarks and
/// determinism checks.
pub fn features_for_frames_seq(frames: &[Frame], opts: &ColorOptions) -> Vec<FrameFeatures> {
    par::map_ordered_seq(frames, |f| frame_features(f, opts))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
}

/// Median (mean-of-middle-two for even counts), sample variance (n−1
/// denominator) and mean of each feature over the segment's frames.
pub fn aggregate_video(
    seq: &[FrameFeatures],
    segment: Segment,
) -> Result<VideoFeatures, ColorFeatError> {
    if seq.is_empty() {
        return Err(ColorFeatError::EmptySequence);
    }
    let mut medians = [0.0; 10];
    let mut variances = [0.0; 10];
    let mut means = [0.0; 10];
    for i in 0..10 {
        let mut column: Vec<f64> = seq.iter().map(|f| f.values()[i]).collect();
        // summing the sorted column makes the result independent of frame order
        column.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        means[i] = column.iter().sum::<f64>() / column.len() as f64;
        variances[i] = sample_variance(&column);
        medians[i] = median(&column);
    }
    let color_lag = if seq.len() >= 3 {
        Some(color_lag(seq)?)
    } else {
        None
    };
    Ok(VideoFeatures {
        medians,
        variances,
        means,
        color_lag,
        segment,
        n_frames: seq.len(),
    })
}

/// Lag-1 Pearson autocorrelation of the per-frame brightness means.
/// Returns 0 for a constant series, where the correlation is undefined.
pub fn color_lag(seq: &[FrameFeatures]) -> Result<f64, ColorFeatError> {
    if seq.len() < 3 {
        return Err(ColorFeatError::TooShortForLag(seq.len()));
    }
    let series: Vec<f64> = seq.iter().map(|f| f.brightness).collect();
    let x = &series[..series.len() - 1];
    let y = &series[1..];
    Ok(pearson(x, y))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// The 20-element model feature vector: 10 medians then 10 variances,
/// both in [`FEATURE_NAMES`] order. Means and color lag are excluded.
pub fn feature_vector(vf: &VideoFeatures) -> Vec<f64> {
    vf.medians.iter().chain(vf.variances.iter()).copied().collect()
}

/// Column names of [`feature_vector`].
pub fn feature_vector_names() -> Vec<String> {
    FEATURE_NAMES
        .iter()
        .map(|n| format!("median_{n}"))
        .chain(FEATURE_NAMES.iter().map(|n| format!("var_{n}")))
        .collect()
}

/// The 31 aggregate CSV columns: variance block, median block, mean
/// block, then `color_lag`.
pub fn visual_csv_columns() -> Vec<String> {
    let mut cols = Vec::with_capacity(31);
    cols.extend(VAR_BLOCK.iter().map(|&i| format!("var_{}", FEATURE_NAMES[i])));
    cols.extend(MEDIAN_BLOCK.iter().map(|&i| format!("median_{}", FEATURE_NAMES[i])));
    cols.extend(MEDIAN_BLOCK.iter().map(|&i| format!("{}_mean", FEATURE_NAMES[i])));
    cols.push("color_lag".to_string());
    cols
}

/// Values matching [`visual_csv_columns`]; `color_lag` is `None` for
/// sequences too short to define it.
pub fn visual_csv_values(vf: &VideoFeatures) -> Vec<Option<f64>> {
    let mut values = Vec::with_capacity(31);
    values.extend(VAR_BLOCK.iter().map(|&i| Some(vf.variances[i])));
    values.extend(MEDIAN_BLOCK.iter().map(|&i| Some(vf.medians[i])));
    values.extend(MEDIAN_BLOCK.iter().map(|&i| Some(vf.means[i])));
    values.push(vf.color_lag);
    values
}

/// Format with 6 significant digits, the precision used in feature CSVs.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}
