//! Raster types and the low-level operations the pipeline is built from.

mod color;
mod components;
mod morphology;
mod png_io;

pub use color::{hsv_to_rgb, rgb_to_hsv};
pub use components::{connected_components, largest_component, Component, Connectivity};
pub use morphology::{morphology, MorphOp};
pub use png_io::{read_png, write_png, write_png_fast};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Gray,
    Rgb,
    Rgba,
    Hsv,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb | ColorSpace::Hsv => 3,
            ColorSpace::Rgba => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorSpace::Gray => "GRAY",
            ColorSpace::Rgb => "RGB",
            ColorSpace::Rgba => "RGBA",
            ColorSpace::Hsv => "HSV",
        }
    }
}

/// Row-major interleaved 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    colorspace: ColorSpace,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, colorspace: ColorSpace) -> Self {
        let len = width as usize * height as usize * colorspace.channels();
        Self {
            width,
            height,
            colorspace,
            data: vec![0; len],
        }
    }

    pub fn from_raw(width: u32, height: u32, colorspace: ColorSpace, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * colorspace.channels();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("{expected} samples"),
                found: format!("{} samples", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            colorspace,
            data,
        })
    }

    /// Image filled with one pixel value; `px.len()` must equal the channel count.
    pub fn filled(width: u32, height: u32, colorspace: ColorSpace, px: &[u8]) -> Self {
        assert_eq!(px.len(), colorspace.channels(), "pixel arity");
        let mut data = Vec::with_capacity(width as usize * height as usize * px.len());
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(px);
        }
        Self {
            width,
            height,
            colorspace,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.colorspace.channels()
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels();
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.data[i..i + c]
    }

    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let c = self.channels();
        let i = (y as usize * self.width as usize + x as usize) * c;
        &mut self.data[i..i + c]
    }

    pub fn ensure(&self, colorspace: ColorSpace) -> Result<()> {
        if self.colorspace == colorspace {
            Ok(())
        } else {
            Err(Error::ColorSpace {
                expected: colorspace.name(),
                found: self.colorspace.name(),
            })
        }
    }

    /// Reinterprets the samples under another tag with the same channel count.
    pub fn retag(mut self, colorspace: ColorSpace) -> Result<Self> {
        if colorspace.channels() != self.channels() {
            return Err(Error::ColorSpace {
                expected: self.colorspace.name(),
                found: colorspace.name(),
            });
        }
        self.colorspace = colorspace;
        Ok(self)
    }

    /// RGB → HSV with hue scaled to 0–255.
    pub fn to_hsv(&self) -> Result<ImageBuffer> {
        self.ensure(ColorSpace::Rgb)?;
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(3) {
            data.extend_from_slice(&rgb_to_hsv([px[0], px[1], px[2]]));
        }
        Ok(ImageBuffer {
            width: self.width,
            height: self.height,
            colorspace: ColorSpace::Hsv,
            data,
        })
    }

    /// Drops the alpha channel of an RGBA image, or expands gray to RGB.
    pub fn to_rgb(&self) -> Result<ImageBuffer> {
        let data = match self.colorspace {
            ColorSpace::Rgb => self.data.clone(),
            ColorSpace::Rgba => self
                .data
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect(),
            ColorSpace::Gray => self.data.iter().flat_map(|&g| [g, g, g]).collect(),
            ColorSpace::Hsv => self
                .data
                .chunks_exact(3)
                .flat_map(|p| hsv_to_rgb([p[0], p[1], p[2]]))
                .collect(),
        };
        Ok(ImageBuffer {
            width: self.width,
            height: self.height,
            colorspace: ColorSpace::Rgb,
            data,
        })
    }

    /// Copy of the `rect` region.
    pub fn crop(&self, rect: PixelBox) -> Result<ImageBuffer> {
        rect.check_within(self.width, self.height)?;
        let c = self.channels();
        let mut data = Vec::with_capacity(rect.area() as usize * c);
        for y in rect.y..rect.y + rect.h {
            let start = (y as usize * self.width as usize + rect.x as usize) * c;
            data.extend_from_slice(&self.data[start..start + rect.w as usize * c]);
        }
        Ok(ImageBuffer {
            width: rect.w,
            height: rect.h,
            colorspace: self.colorspace,
            data,
        })
    }

    /// Nearest-neighbor resample to `width × height`.
    pub fn resize_nearest(&self, width: u32, height: u32) -> ImageBuffer {
        let c = self.channels();
        let xs = nearest_index_map(self.width, width);
        let ys = nearest_index_map(self.height, height);
        let mut data = Vec::with_capacity(width as usize * height as usize * c);
        for &sy in &ys {
            for &sx in &xs {
                let i = (sy * self.width as usize + sx) * c;
                data.extend_from_slice(&self.data[i..i + c]);
            }
        }
        ImageBuffer {
            width,
            height,
            colorspace: self.colorspace,
            data,
        }
    }
}

pub(crate) fn nearest_index_map(src: u32, dst: u32) -> Vec<usize> {
    (0..dst as u64)
        .map(|d| (((2 * d + 1) * src as u64) / (2 * dst as u64)).min(src as u64 - 1) as usize)
        .collect()
}

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::DimensionMismatch {
                expected: format!("{} bits", width as usize * height as usize),
                found: format!("{} bits", bits.len()),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Tight box around the set pixels, `None` for an empty mask.
    pub fn bounding_box(&self) -> Option<PixelBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            let row = &self.bits[y as usize * self.width as usize..][..self.width as usize];
            for (x, _) in row.iter().enumerate().filter(|(_, &b)| b) {
                let x = x as u32;
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        (x0 != u32::MAX).then(|| PixelBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    pub fn crop(&self, rect: PixelBox) -> Result<BinaryMask> {
        rect.check_within(self.width, self.height)?;
        let mut bits = Vec::with_capacity(rect.area() as usize);
        for y in rect.y..rect.y + rect.h {
            let start = y as usize * self.width as usize + rect.x as usize;
            bits.extend_from_slice(&self.bits[start..start + rect.w as usize]);
        }
        Ok(BinaryMask {
            width: rect.w,
            height: rect.h,
            bits,
        })
    }

    pub fn resize_nearest(&self, width: u32, height: u32) -> BinaryMask {
        let xs = nearest_index_map(self.width, width);
        let ys = nearest_index_map(self.height, height);
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for &sy in &ys {
            for &sx in &xs {
                bits.push(self.bits[sy * self.width as usize + sx]);
            }
        }
        BinaryMask { width, height, bits }
    }

    /// Intersection over union of two same-sized masks; two empty masks give 1.
    pub fn iou(&self, other: &BinaryMask) -> Result<f64> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.width, self.height),
                found: format!("{}x{}", other.width, other.height),
            });
        }
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
    }

    /// 0/255 grayscale rendering.
    pub fn to_image(&self) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            colorspace: ColorSpace::Gray,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

/// Axis-aligned pixel rectangle: left, top, width, height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelBox {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.w == 0 || self.h == 0 || self.right() > width || self.bottom() > height {
            return Err(Error::DimensionMismatch {
                expected: format!("non-empty box inside {width}x{height}"),
                found: format!("{self:?}"),
            });
        }
        Ok(())
    }

    pub fn iou(&self, other: &PixelBox) -> f64 {
        let ix = self.right().min(other.right()).saturating_sub(self.x.max(other.x)) as u64;
        let iy = self.bottom().min(other.bottom()).saturating_sub(self.y.max(other.y)) as u64;
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}
