//! Binary morphology with a (2r+1)×(2r+1) square structuring element.
//!
//! The mask is treated as a window onto an infinite plane whose pixels outside
//! the frame are background. Erosion therefore eats `r` pixels from a region
//! touching the frame edge, while dilation, opening and closing of a full mask
//! stay full: composite operations keep their intermediate result on a domain
//! padded by `r`, so a closing can see dilated foreground beyond the frame.

use super::BinaryMask;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

pub fn morphology(mask: &BinaryMask, op: MorphOp, radius: u32) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::InvalidParam("morphology radius must be ≥ 1".into()));
    }
    let r = radius as usize;
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let mut padded = vec![false; pw * ph];
    for y in 0..h {
        padded[(y + r) * pw + r..][..w].copy_from_slice(&mask.bits()[y * w..][..w]);
    }

    let out = match op {
        MorphOp::Erode => erode(&padded, pw, ph, r),
        MorphOp::Dilate => dilate(&padded, pw, ph, r),
        MorphOp::Open => dilate(&erode(&padded, pw, ph, r), pw, ph, r),
        MorphOp::Close => erode(&dilate(&padded, pw, ph, r), pw, ph, r),
    };

    let mut bits = Vec::with_capacity(w * h);
    for y in 0..h {
        bits.extend_from_slice(&out[(y + r) * pw + r..][..w]);
    }
    BinaryMask::from_bits(mask.width(), mask.height(), bits)
}

/// Summed-area table with a zero top row and left column.
fn integral(bits: &[bool], w: usize, h: usize) -> Vec<u32> {
    let mut sat = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += bits[y * w + x] as u32;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    sat
}

fn window_sum(sat: &[u32], w: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> u32 {
    // inclusive-exclusive [x0, x1) × [y0, y1)
    let s = w + 1;
    sat[y1 * s + x1] + sat[y0 * s + x0] - sat[y0 * s + x1] - sat[y1 * s + x0]
}

fn erode(bits: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let sat = integral(bits, w, h);
    let full = ((2 * r + 1) * (2 * r + 1)) as u32;
    let mut out = vec![false; w * h];
    for y in r..h.saturating_sub(r) {
        for x in r..w.saturating_sub(r) {
            out[y * w + x] = window_sum(&sat, w, x - r, y - r, x + r + 1, y + r + 1) == full;
        }
    }
    out
}

fn dilate(bits: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let sat = integral(bits, w, h);
    let mut out = vec![false; w * h];
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            out[y * w + x] = window_sum(&sat, w, x0, y0, x1, y1) > 0;
        }
    }
    out
}
