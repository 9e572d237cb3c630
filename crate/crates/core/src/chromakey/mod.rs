//! Green-screen keying and matting of object captures.

mod ingest;
mod manifest;

pub use ingest::{
    ingest_capture_set, CameraCount, ClassReport, FailureKind, FrameFailure, IngestOptions, IngestReport,
};
pub use manifest::{ClassEntry, ClassManifest};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::imaging::{
    largest_component, morphology, rgb_to_hsv, BinaryMask, ColorSpace, Connectivity, ImageBuffer, MorphOp,
    PixelBox,
};
use crate::{Error, Result};

/// Key window in byte-scaled HSV (hue 0–255 spans 360°).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeyParams {
    pub hue_min: u8,
    pub hue_max: u8,
    pub sat_min: u8,
    pub val_min: u8,
    /// 0 skips the opening step.
    pub open_radius: u32,
    /// 0 skips the closing step.
    pub close_radius: u32,
    pub despill: bool,
}

impl Default for KeyParams {
    fn default() -> Self {
        Self {
            hue_min: 64,
            hue_max: 106,
            sat_min: 77,
            val_min: 38,
            open_radius: 1,
            close_radius: 2,
            despill: true,
        }
    }
}

impl KeyParams {
    pub fn validate(&self) -> Result<()> {
        if self.hue_min >= self.hue_max {
            return Err(Error::InvalidParam(format!(
                "hue window must satisfy hue_min < hue_max, got [{}, {}]",
                self.hue_min, self.hue_max
            )));
        }
        Ok(())
    }

    pub fn is_key_color(&self, rgb: [u8; 3]) -> bool {
        let [h, s, v] = rgb_to_hsv(rgb);
        (self.hue_min..=self.hue_max).contains(&h) && s >= self.sat_min && v >= self.val_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Camera {
    High,
    Low,
}

impl Camera {
    pub const ALL: [Camera; 2] = [Camera::High, Camera::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Camera::High => "high",
            Camera::Low => "low",
        }
    }
}

impl fmt::Display for Camera {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Camera {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Camera::High),
            "low" => Ok(Camera::Low),
            other => Err(Error::InvalidParam(format!("unknown camera {other:?}"))),
        }
    }
}

/// Where a crop came from: turntable frame index and camera.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub view: u32,
    pub camera: Camera,
}

/// A matted object cutout. `rgba` and `mask` share the crop's dimensions;
/// alpha is 255 exactly where the mask is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectCrop {
    pub class_id: u32,
    pub class_name: String,
    pub rgba: ImageBuffer,
    pub mask: BinaryMask,
    pub source_view: u32,
    pub source_camera: Camera,
    /// Crop rectangle in the source frame.
    pub source_box: PixelBox,
}

impl ObjectCrop {
    pub fn width(&self) -> u32 {
        self.mask.width()
    }

    pub fn height(&self) -> u32 {
        self.mask.height()
    }

    /// Checks alpha/mask agreement and that every border row and column of
    /// the mask touches the object.
    pub fn check_invariants(&self) -> Result<()> {
        let (w, h) = (self.width(), self.height());
        if self.rgba.colorspace() != ColorSpace::Rgba || (self.rgba.width(), self.rgba.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: format!("{w}x{h} RGBA"),
                found: format!("{}x{} {}", self.rgba.width(), self.rgba.height(), self.rgba.colorspace().name()),
            });
        }
        for (px, &m) in self.rgba.data().chunks_exact(4).zip(self.mask.bits()) {
            if px[3] != if m { 255 } else { 0 } {
                return Err(Error::InvalidParam("alpha disagrees with mask".into()));
            }
        }
        if self.mask.bounding_box() != Some(PixelBox::new(0, 0, w, h)) {
            return Err(Error::InvalidParam("crop mask is not tight".into()));
        }
        Ok(())
    }
}

/// Foreground mask of an RGB frame shot against the key color.
///
/// A pixel is background when its hue lies in the key window and both its
/// saturation and value reach the minimums. The raw foreground is opened,
/// closed, and reduced to its largest 4-connected component.
pub fn segment(image: &ImageBuffer, params: &KeyParams) -> Result<BinaryMask> {
    image.ensure(ColorSpace::Rgb)?;
    params.validate()?;
    let bits = image
        .data()
        .chunks_exact(3)
        .map(|p| !params.is_key_color([p[0], p[1], p[2]]))
        .collect();
    let mut mask = BinaryMask::from_bits(image.width(), image.height(), bits)?;
    if params.open_radius > 0 {
        mask = morphology(&mask, MorphOp::Open, params.open_radius)?;
    }
    if params.close_radius > 0 {
        mask = morphology(&mask, MorphOp::Close, params.close_radius)?;
    }
    Ok(largest_component(&mask, Connectivity::Four))
}

/// Cuts the masked object out of `image` into a tight RGBA crop.
///
/// With `despill`, the green channel of every foreground pixel is clamped to
/// `max(R, B)`; the mask and box are unaffected.
pub fn matte(
    image: &ImageBuffer,
    mask: &BinaryMask,
    class: &ClassEntry,
    provenance: Provenance,
    despill: bool,
) -> Result<ObjectCrop> {
    image.ensure(ColorSpace::Rgb)?;
    if (image.width(), image.height()) != (mask.width(), mask.height()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", image.width(), image.height()),
            found: format!("{}x{}", mask.width(), mask.height()),
        });
    }
    let bbox = mask.bounding_box().ok_or(Error::NoObject)?;
    let rgb = image.crop(bbox)?;
    let mask = mask.crop(bbox)?;
    let mut data = Vec::with_capacity(bbox.area() as usize * 4);
    for (px, &m) in rgb.data().chunks_exact(3).zip(mask.bits()) {
        let (r, mut g, b) = (px[0], px[1], px[2]);
        if m && despill {
            g = g.min(r.max(b));
        }
        data.extend_from_slice(&[r, g, b, if m { 255 } else { 0 }]);
    }
    Ok(ObjectCrop {
        class_id: class.id,
        class_name: class.name.clone(),
        rgba: ImageBuffer::from_raw(bbox.w, bbox.h, ColorSpace::Rgba, data)?,
        mask,
        source_view: provenance.view,
        source_camera: provenance.camera,
        source_box: bbox,
    })
}
