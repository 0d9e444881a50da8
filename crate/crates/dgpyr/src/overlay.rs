//! Region borders drawn over the input image.

use dgpyr_core::Image;

pub const BORDER: [u8; 3] = [255, 0, 0];

/// Pixels with a 4-neighbour of another label. Both sides of every border
/// are marked.
pub fn border_mask(width: usize, height: usize, labels: &[u32]) -> Vec<bool> {
    assert_eq!(labels.len(), width * height);
    let mut mask = vec![false; labels.len()];
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            if x + 1 < width && labels[p] != labels[p + 1] {
                mask[p] = true;
                mask[p + 1] = true;
            }
            if y + 1 < height && labels[p] != labels[p + width] {
                mask[p] = true;
                mask[p + width] = true;
            }
        }
    }
    mask
}

/// RGB copy of `image` with border pixels painted red.
pub fn overlay(image: &Image, labels: &[u32]) -> Image {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let mask = border_mask(w, h, labels);
    let mut data = Vec::with_capacity(w * h * 3);
    for (i, &m) in mask.iter().enumerate() {
        if m {
            data.extend_from_slice(&BORDER);
        } else {
            match image.pixel(i) {
                [g] => data.extend_from_slice(&[*g, *g, *g]),
                rgb => data.extend_from_slice(rgb),
            }
        }
    }
    Image::new(image.width(), image.height(), 3, data).expect("same size")
}
