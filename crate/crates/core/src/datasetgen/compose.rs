//! Hard-alpha pasting of a crop around an anchor.

use super::{Anchor, Label};
use crate::chromakey::ObjectCrop;
use crate::imaging::{BinaryMask, ColorSpace, ImageBuffer, PixelBox};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Placement {
    pub label: Label,
    /// Tight box of the pasted mask in background pixels.
    pub bbox: PixelBox,
    /// Top-left corner of the (scaled) crop on the background.
    pub origin: (u32, u32),
    /// The crop mask as pasted, at its scaled size.
    pub mask: BinaryMask,
    /// Scale actually applied after the anchor's size cap.
    pub effective_scale: f64,
}

/// Pastes `crop` centered on `anchor` at `scale`, copying crop pixels where
/// its mask is set. A crop larger than the anchor cap is shrunk uniformly to
/// fit it. Fails, leaving `background` untouched, if the result would extend
/// past the frame.
pub fn place(background: &mut ImageBuffer, crop: &ObjectCrop, anchor: &Anchor, scale: f64) -> Result<Placement> {
    background.ensure(ColorSpace::Rgb)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParam(format!("scale must be > 0, got {scale}")));
    }
    let (cw, ch) = (crop.width(), crop.height());
    let (mut tw, mut th) = (f64::from(cw) * scale, f64::from(ch) * scale);
    let mut effective = scale;
    if tw > f64::from(anchor.max_w) || th > f64::from(anchor.max_h) {
        let f = (f64::from(anchor.max_w) / tw).min(f64::from(anchor.max_h) / th);
        tw *= f;
        th *= f;
        effective *= f;
    }
    let sw = (tw.round() as u32).clamp(1, anchor.max_w);
    let sh = (th.round() as u32).clamp(1, anchor.max_h);

    let x0 = i64::from(anchor.cx) - i64::from(sw / 2);
    let y0 = i64::from(anchor.cy) - i64::from(sh / 2);
    if x0 < 0 || y0 < 0 || x0 + i64::from(sw) > i64::from(background.width()) || y0 + i64::from(sh) > i64::from(background.height()) {
        return Err(Error::Placement(format!(
            "{sw}x{sh} crop centered at ({}, {}) does not fit the {}x{} background",
            anchor.cx,
            anchor.cy,
            background.width(),
            background.height()
        )));
    }
    let (x0, y0) = (x0 as u32, y0 as u32);

    let (rgba, mask) = if (sw, sh) == (cw, ch) {
        (crop.rgba.clone(), crop.mask.clone())
    } else {
        (crop.rgba.resize_nearest(sw, sh), crop.mask.resize_nearest(sw, sh))
    };
    let local = mask
        .bounding_box()
        .ok_or_else(|| Error::Placement(format!("crop vanished when scaled to {sw}x{sh}")))?;

    for y in 0..sh {
        for x in 0..sw {
            if mask.get(x, y) {
                let src = rgba.pixel(x, y);
                background.pixel_mut(x0 + x, y0 + y).copy_from_slice(&src[..3]);
            }
        }
    }

    let bbox = PixelBox::new(x0 + local.x, y0 + local.y, local.w, local.h);
    Ok(Placement {
        label: Label::from_box(crop.class_id, bbox, background.width(), background.height()),
        bbox,
        origin: (x0, y0),
        mask,
        effective_scale: effective,
    })
}
