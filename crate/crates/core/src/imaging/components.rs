//! Connected-component labeling of binary masks.

use super::{BinaryMask, PixelBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    /// Ids are assigned in raster order of each component's first pixel, from 0.
    pub id: u32,
    pub count: usize,
    pub bbox: PixelBox,
}

/// Labels every set pixel; returns the per-pixel label map (`u32::MAX` for
/// background) and the component list.
pub(crate) fn label(mask: &BinaryMask, connectivity: Connectivity) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut labels = vec![u32::MAX; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    let offsets: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        Connectivity::Eight => &[
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ],
    };

    for start in 0..w * h {
        if !bits[start] || labels[start] != u32::MAX {
            continue;
        }
        let id = components.len() as u32;
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut count = 0;
        labels[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            count += 1;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
            for &(dx, dy) in offsets {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if bits[j] && labels[j] == u32::MAX {
                    labels[j] = id;
                    stack.push(j);
                }
            }
        }
        components.push(Component {
            id,
            count,
            bbox: PixelBox::new(x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32),
        });
    }
    (labels, components)
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    label(mask, connectivity).1
}

/// Keeps only the component with the most pixels (lowest id on ties).
pub fn largest_component(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let (labels, components) = label(mask, connectivity);
    let Some(best) = components
        .iter()
        .max_by(|a, b| a.count.cmp(&b.count).then(b.id.cmp(&a.id)))
    else {
        return mask.clone();
    };
    let bits = labels.iter().map(|&l| l == best.id).collect();
    BinaryMask::from_bits(mask.width(), mask.height(), bits).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::new(8, 8), Connectivity::Eight).is_empty());
    }

    #[test]
    fn single_pixel() {
        let mut m = BinaryMask::new(10, 10);
        m.set(3, 4, true);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].count, 1);
        assert_eq!(cc[0].bbox, PixelBox::new(3, 4, 1, 1));
    }

    #[test]
    fn diagonal_neighbors_depend_on_connectivity() {
        let mut m = BinaryMask::new(4, 4);
        m.set(1, 1, true);
        m.set(2, 2, true);
        assert_eq!(connected_components(&m, Connectivity::Four).len(), 2);
        assert_eq!(connected_components(&m, Connectivity::Eight).len(), 1);
    }

    #[test]
    fn largest_keeps_biggest_blob() {
        let m = BinaryMask::from_fn(10, 10, |x, y| (x < 2 && y < 2) || (x > 5 && y > 5));
        let l = largest_component(&m, Connectivity::Four);
        assert_eq!(l.count(), 16);
        assert!(!l.get(0, 0));
        assert!(l.get(9, 9));
    }

    #[test]
    fn largest_tie_prefers_first_in_raster_order() {
        let m = BinaryMask::from_fn(5, 1, |x, _| x == 0 || x == 4);
        let l = largest_component(&m, Connectivity::Four);
        assert!(l.get(0, 0));
        assert!(!l.get(4, 0));
    }
}
