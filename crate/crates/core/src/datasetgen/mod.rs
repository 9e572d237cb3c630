//! Compositing of object crops onto backgrounds and darknet dataset output.
//!
//! Generation is split into a cheap planning pass, which fixes every random
//! choice for every sample up front from per-sample seed substreams, and a
//! rendering pass that turns one planned sample into pixels. Rendering order
//! therefore never affects the output.

mod compose;
mod config;
mod darknet;
mod generate;
mod layout;
mod stats;

pub use compose::{place, Placement};
pub use config::{ClassBalance, FillPolicy, GenConfig};
pub use darknet::{
    emit_darknet, emit_samples, format_label_line, parse_label_file, parse_label_line, read_darknet, DarknetTree,
    DarknetWriter, INCOMPLETE_MARKER,
};
pub use generate::{
    pair_backgrounds, Background, CropRef, CropStore, DatasetManifest, Generator, Pick, PlacementRecord,
    SampleRecord, SampleSpec, SkipRecord,
};
pub use layout::{Anchor, AnchorLayout};
pub use stats::{dataset_stats, DatasetStats, LabelProblem};

use serde::{Deserialize, Serialize};

use crate::imaging::{ImageBuffer, PixelBox};

/// One darknet box: class plus center and size as fractions of the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub class_id: u32,
    pub x_center: f64,
    pub y_center: f64,
    pub width: f64,
    pub height: f64,
}

impl Label {
    pub fn from_box(class_id: u32, b: PixelBox, image_w: u32, image_h: u32) -> Self {
        let (iw, ih) = (f64::from(image_w), f64::from(image_h));
        Self {
            class_id,
            x_center: (f64::from(b.x) + f64::from(b.w) / 2.0) / iw,
            y_center: (f64::from(b.y) + f64::from(b.h) / 2.0) / ih,
            width: f64::from(b.w) / iw,
            height: f64::from(b.h) / ih,
        }
    }

    /// Back to pixels, rounding each edge to the nearest integer.
    pub fn to_box(&self, image_w: u32, image_h: u32) -> PixelBox {
        let (iw, ih) = (f64::from(image_w), f64::from(image_h));
        let x0 = ((self.x_center - self.width / 2.0) * iw).round().max(0.0);
        let y0 = ((self.y_center - self.height / 2.0) * ih).round().max(0.0);
        let x1 = ((self.x_center + self.width / 2.0) * iw).round().min(iw);
        let y1 = ((self.y_center + self.height / 2.0) * ih).round().min(ih);
        PixelBox::new(x0 as u32, y0 as u32, (x1 - x0).max(0.0) as u32, (y1 - y0).max(0.0) as u32)
    }

    /// True when the box lies within the unit square.
    pub fn is_inside_unit(&self) -> bool {
        let eps = 1e-9;
        self.width > 0.0
            && self.height > 0.0
            && self.x_center - self.width / 2.0 >= -eps
            && self.x_center + self.width / 2.0 <= 1.0 + eps
            && self.y_center - self.height / 2.0 >= -eps
            && self.y_center + self.height / 2.0 <= 1.0 + eps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleProvenance {
    pub background_id: String,
    pub round: u32,
    pub seed: u64,
}

/// A rendered training image and its labels.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub id: String,
    pub image: ImageBuffer,
    pub labels: Vec<Label>,
    pub provenance: SampleProvenance,
    pub record: SampleRecord,
}
