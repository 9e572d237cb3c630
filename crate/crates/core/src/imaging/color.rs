//! Hexcone RGB ↔ HSV with every component stored in one byte.
//!
//! Hue is scaled so that 0–255 spans the full 0–360° circle.

/// RGB → HSV. Hue is 0 for achromatic input.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> [u8; 3] {
    let [r, g, b] = rgb.map(i32::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if delta == 0 {
        return [0, 0, max as u8];
    }
    let delta_f = delta as f64;
    let sector = if max == r {
        (g - b) as f64 / delta_f
    } else if max == g {
        2.0 + (b - r) as f64 / delta_f
    } else {
        4.0 + (r - g) as f64 / delta_f
    };
    let degrees = (sector * 60.0).rem_euclid(360.0);
    let h = (degrees * 255.0 / 360.0).round() as u32 % 256;
    let s = (255.0 * delta_f / max as f64).round() as u8;
    [h as u8, s, max as u8]
}

/// HSV → RGB, the inverse of [`rgb_to_hsv`] up to quantization.
pub fn hsv_to_rgb(hsv: [u8; 3]) -> [u8; 3] {
    let [h, s, v] = hsv;
    if s == 0 {
        return [v, v, v];
    }
    let v_f = f64::from(v);
    let s_f = f64::from(s) / 255.0;
    let sector = (f64::from(h) * 360.0 / 255.0) / 60.0;
    let i = sector.floor();
    let f = sector - i;
    let p = v_f * (1.0 - s_f);
    let q = v_f * (1.0 - s_f * f);
    let t = v_f * (1.0 - s_f * (1.0 - f));
    let (r, g, b) = match i as u32 % 6 {
        0 => (v_f, t, p),
        1 => (q, v_f, p),
        2 => (p, v_f, t),
        3 => (p, q, v_f),
        4 => (t, p, v_f),
        _ => (v_f, p, q),
    };
    [r, g, b].map(|c| c.round().clamp(0.0, 255.0) as u8)
}
