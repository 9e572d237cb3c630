//! Seeded green-screen scenes with known ground truth, for fixtures and
//! tests.

use rand::Rng;

use crate::chromakey::KeyParams;
use crate::imaging::{hsv_to_rgb, BinaryMask, ColorSpace, ImageBuffer, PixelBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Ellipse,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: ImageBuffer,
    pub mask: BinaryMask,
    pub bbox: PixelBox,
    pub shape: Shape,
}

/// A green backdrop whose hue, saturation and value sit inside `key`, with
/// small per-pixel noise that never leaves the window.
pub fn green_backdrop(width: u32, height: u32, key: &KeyParams, rng: &mut impl Rng) -> ImageBuffer {
    let (lo, hi) = (key.hue_min as i32 + 4, key.hue_max as i32 - 4);
    let hue = rng.gen_range(lo.min(hi)..=hi.max(lo));
    let sat = rng.gen_range((key.sat_min as i32 + 60).min(255)..=255);
    let val = rng.gen_range((key.val_min as i32 + 100).min(255)..=255);
    let mut img = ImageBuffer::new(width, height, ColorSpace::Rgb);
    for px in img.data_mut().chunks_exact_mut(3) {
        loop {
            let h = (hue + rng.gen_range(-3..=3)).clamp(0, 255) as u8;
            let s = (sat + rng.gen_range(-12..=12)).clamp(0, 255) as u8;
            let v = (val + rng.gen_range(-12..=12)).clamp(0, 255) as u8;
            let rgb = hsv_to_rgb([h, s, v]);
            if key.is_key_color(rgb) {
                px.copy_from_slice(&rgb);
                break;
            }
        }
    }
    img
}

/// A color the key never matches: a hue away from green, or a low-saturation
/// gray.
pub fn object_color(key: &KeyParams, rng: &mut impl Rng) -> [u8; 3] {
    loop {
        let rgb = if rng.gen_bool(0.2) {
            let g = rng.gen_range(40..=230);
            [g, g, g]
        } else {
            [rng.gen(), rng.gen(), rng.gen()]
        };
        let [h, s, _] = crate::imaging::rgb_to_hsv(rgb);
        let near_green = (key.hue_min.saturating_sub(12)..=key.hue_max.saturating_add(12)).contains(&h);
        if !key.is_key_color(rgb) && !(near_green && s >= key.sat_min / 2) {
            return rgb;
        }
    }
}

/// A random rectangle or ellipse covering roughly 15–60% of each side,
/// painted with a noisy non-key color over a jittered green backdrop.
pub fn green_screen_scene(width: u32, height: u32, key: &KeyParams, rng: &mut impl Rng) -> Scene {
    let mut image = green_backdrop(width, height, key, rng);
    let w = rng.gen_range((width * 15 / 100).max(6)..=(width * 60 / 100).max(7));
    let h = rng.gen_range((height * 15 / 100).max(6)..=(height * 60 / 100).max(7));
    let x = rng.gen_range(1..width - w);
    let y = rng.gen_range(1..height - h);
    let shape = if rng.gen_bool(0.5) { Shape::Rect } else { Shape::Ellipse };
    let (cx, cy) = (x as f64 + w as f64 / 2.0, y as f64 + h as f64 / 2.0);
    let (rx, ry) = (w as f64 / 2.0, h as f64 / 2.0);
    let inside = |px: u32, py: u32| {
        if px < x || py < y || px >= x + w || py >= y + h {
            return false;
        }
        match shape {
            Shape::Rect => true,
            Shape::Ellipse => {
                let dx = (px as f64 + 0.5 - cx) / rx;
                let dy = (py as f64 + 0.5 - cy) / ry;
                dx * dx + dy * dy <= 1.0
            }
        }
    };
    let mask = BinaryMask::from_fn(width, height, inside);
    let base = object_color(key, rng);
    for py in 0..height {
        for px in 0..width {
            if !mask.get(px, py) {
                continue;
            }
            let rgb = loop {
                let c = base.map(|v| (v as i32 + rng.gen_range(-10..=10)).clamp(0, 255) as u8);
                if !key.is_key_color(c) {
                    break c;
                }
            };
            image.pixel_mut(px, py).copy_from_slice(&rgb);
        }
    }
    let bbox = mask.bounding_box().expect("shape has at least one pixel");
    Scene { image, mask, bbox, shape }
}
