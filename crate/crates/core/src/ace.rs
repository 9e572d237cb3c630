//! Automatic Color Equalization.
//!
//! Each channel is processed independently in two stages. The first stage
//! accumulates, for every pixel, the saturated intensity differences to all
//! other pixels weighted by inverse Euclidean distance:
//!
//! ```text
//! R(p) = Σ_{j≠p} clamp(slope · (I(p) − I(j)) / 255, −1, 1) / ‖p − j‖
//! ```
//!
//! The second stage stretches `R` linearly so its minimum maps to 0 and its
//! maximum to 255. A channel whose `R` is constant maps to `degenerate_value`.
//!
//! The exhaustive form is O(N²). [`ace_sampled`] evaluates the sum over a
//! per-pixel random subset of the other pixels and rescales it by
//! `(N − 1) / samples`; each pixel draws its subset from its own seeded
//! substream, so results do not depend on thread scheduling.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imaging::{ColorSpace, ImageBuffer};
use crate::seed::substream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AceParams {
    pub slope: f64,
    /// Comparison pixels per target pixel; 0 selects the exhaustive sum.
    pub samples: usize,
    pub seed: u64,
    pub degenerate_value: u8,
}

impl Default for AceParams {
    fn default() -> Self {
        Self {
            slope: 10.0,
            samples: 500,
            seed: 0,
            degenerate_value: 128,
        }
    }
}

impl AceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope.is_finite() && self.slope > 0.0) {
            return Err(Error::InvalidParam(format!("ACE slope must be > 0, got {}", self.slope)));
        }
        if self.samples != 0 && self.samples < 8 {
            return Err(Error::InvalidParam(format!(
                "ACE samples must be 0 (exhaustive) or ≥ 8, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Runs the exhaustive or the sampled variant depending on `params.samples`.
pub fn ace(image: &ImageBuffer, params: &AceParams) -> Result<ImageBuffer> {
    if params.samples == 0 {
        ace_exhaustive(image, params)
    } else {
        ace_sampled(image, params)
    }
}

/// Exhaustive ACE; `params.samples` is ignored.
pub fn ace_exhaustive(image: &ImageBuffer, params: &AceParams) -> Result<ImageBuffer> {
    image.ensure(ColorSpace::Rgb)?;
    AceParams { samples: 0, ..*params }.validate()?;
    let response = chromatic_response(image, params.slope, None);
    Ok(tone_map(image, &response, params.degenerate_value))
}

/// Sampled ACE; requires `params.samples ≥ 8`. With `samples ≥ N − 1` every
/// other pixel is used and the result equals [`ace_exhaustive`] bit for bit.
pub fn ace_sampled(image: &ImageBuffer, params: &AceParams) -> Result<ImageBuffer> {
    image.ensure(ColorSpace::Rgb)?;
    params.validate()?;
    if params.samples == 0 {
        return Err(Error::InvalidParam("sampled ACE needs samples ≥ 8".into()));
    }
    let response = chromatic_response(image, params.slope, Some((params.samples, params.seed)));
    Ok(tone_map(image, &response, params.degenerate_value))
}

/// First stage: per-pixel, per-channel accumulated response.
fn chromatic_response(
    image: &ImageBuffer,
    slope: f64,
    sampling: Option<(usize, u64)>,
) -> Vec<[f64; 3]> {
    let width = image.width() as usize;
    let n = image.pixel_count();
    let data = image.data();
    let mut response = vec![[0.0f64; 3]; n];
    if n < 2 {
        return response;
    }

    let contribution = |p: usize, j: usize, acc: &mut [f64; 3]| {
        let dx = (p % width) as f64 - (j % width) as f64;
        let dy = (p / width) as f64 - (j / width) as f64;
        let inv_d = 1.0 / (dx * dx + dy * dy).sqrt();
        for c in 0..3 {
            let diff = i32::from(data[p * 3 + c]) - i32::from(data[j * 3 + c]);
            let t = (slope * (diff as f64 / 255.0)).clamp(-1.0, 1.0);
            acc[c] += t * inv_d;
        }
    };

    response
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| {
            let mut picks: Vec<usize> = Vec::new();
            let mut seen: Vec<u64> = Vec::new();
            for (col, acc) in out.iter_mut().enumerate() {
                let p = row * width + col;
                let others = n - 1;
                let amount = sampling.map_or(others, |(samples, _)| samples.min(others));
                if amount == others {
                    for j in (0..n).filter(|&j| j != p) {
                        contribution(p, j, acc);
                    }
                    continue;
                }
                let seed = sampling.expect("partial sums only when sampling").1;
                let mut rng = substream(seed, p as u64);
                picks.clear();
                if amount * 4 <= others {
                    // sparse draw: rejection against a bitset reused across the row
                    seen.resize(n.div_ceil(64), 0);
                    while picks.len() < amount {
                        let k = rng.gen_range(0..others);
                        let j = if k >= p { k + 1 } else { k };
                        let (word, bit) = (j / 64, 1u64 << (j % 64));
                        if seen[word] & bit == 0 {
                            seen[word] |= bit;
                            picks.push(j);
                        }
                    }
                    for &j in &picks {
                        seen[j / 64] = 0;
                    }
                } else {
                    picks.extend(
                        index::sample(&mut rng, others, amount)
                            .into_iter()
                            .map(|k| if k >= p { k + 1 } else { k }),
                    );
                }
                for &j in &picks {
                    contribution(p, j, acc);
                }
                let scale = others as f64 / amount as f64;
                for v in acc.iter_mut() {
                    *v *= scale;
                }
            }
        });
    response
}

/// Second stage: per-channel min–max stretch to 0–255, rounding half up.
fn tone_map(image: &ImageBuffer, response: &[[f64; 3]], degenerate: u8) -> ImageBuffer {
    let mut out = ImageBuffer::new(image.width(), image.height(), ColorSpace::Rgb);
    for c in 0..3 {
        let (lo, hi) = response
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[c]), hi.max(r[c])));
        let data = out.data_mut();
        if response.is_empty() || hi <= lo {
            for p in 0..response.len() {
                data[p * 3 + c] = degenerate;
            }
            continue;
        }
        let span = hi - lo;
        for (p, r) in response.iter().enumerate() {
            let v = ((r[c] - lo) / span * 255.0 + 0.5).floor();
            data[p * 3 + c] = v.clamp(0.0, 255.0) as u8;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[u8]) -> ImageBuffer {
        let data = values.iter().flat_map(|&v| [v, 0, 0]).collect();
        ImageBuffer::from_raw(values.len() as u32, 1, ColorSpace::Rgb, data).unwrap()
    }

    fn exhaustive() -> AceParams {
        AceParams {
            samples: 0,
            ..AceParams::default()
        }
    }

    #[test]
    fn params_validation() {
        assert!(AceParams::default().validate().is_ok());
        assert!(AceParams { samples: 4, ..AceParams::default() }.validate().is_err());
        assert!(AceParams { samples: 8, ..AceParams::default() }.validate().is_ok());
        assert!(AceParams { slope: 0.0, ..AceParams::default() }.validate().is_err());
        assert!(AceParams { slope: f64::NAN, ..AceParams::default() }.validate().is_err());
    }

    #[test]
    fn uniform_image_is_degenerate() {
        let img = ImageBuffer::filled(16, 16, ColorSpace::Rgb, &[12, 200, 77]);
        let out = ace_exhaustive(&img, &exhaustive()).unwrap();
        assert!(out.data().iter().all(|&v| v == 128));
        let out = ace_sampled(&img, &AceParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 128));
    }

    #[test]
    fn two_pixel_row() {
        // R = [−1, +1] → extremes.
        let out = ace_exhaustive(&row(&[0, 255]), &exhaustive()).unwrap();
        assert_eq!(out.data().chunks(3).map(|p| p[0]).collect::<Vec<_>>(), [0, 255]);
    }

    #[test]
    fn three_pixel_row() {
        // R = [−1.5, 0, +1.5]; the middle lands on 127.5 and rounds up.
        let out = ace_exhaustive(&row(&[0, 128, 255]), &exhaustive()).unwrap();
        assert_eq!(out.data().chunks(3).map(|p| p[0]).collect::<Vec<_>>(), [0, 128, 255]);
        // the flat channels stay degenerate
        assert!(out.data().chunks(3).all(|p| p[1] == 128 && p[2] == 128));
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let img = ImageBuffer::filled(1, 1, ColorSpace::Rgb, &[1, 2, 3]);
        let out = ace_exhaustive(&img, &AceParams { degenerate_value: 9, ..exhaustive() }).unwrap();
        assert_eq!(out.data(), &[9, 9, 9]);
    }

    #[test]
    fn rejects_non_rgb() {
        let img = ImageBuffer::new(4, 4, ColorSpace::Rgba);
        assert!(matches!(ace(&img, &AceParams::default()), Err(Error::ColorSpace { .. })));
        let img = ImageBuffer::new(4, 4, ColorSpace::Rgb);
        assert!(ace_sampled(&img, &exhaustive()).is_err());
    }
}
