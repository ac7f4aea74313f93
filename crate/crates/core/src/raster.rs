//! Grayscale raster helpers shared by the image-processing stages.
//!
//! Images are `ndarray::Array2<f64>` in row-major `(row, col)` order with
//! intensities in `[0, 1]` (0 = black ink, 1 = white background).

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub type Gray = Array2<f64>;
pub type Mask = Array2<bool>;

/// Load an image file as grayscale in `[0, 1]`. Color inputs are averaged
/// over their channels.
pub fn load_gray(path: &Path) -> Result<Gray> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut out = Array2::zeros((h, w));
    for (x, y, p) in rgb.enumerate_pixels() {
        let v = (p.0[0] as f64 + p.0[1] as f64 + p.0[2] as f64) / (3.0 * 255.0);
        out[[y as usize, x as usize]] = v;
    }
    Ok(out)
}

/// Save a grayscale image, clamping to `[0, 1]` and quantizing to 8 bits.
pub fn save_gray(img: &Gray, path: &Path) -> Result<()> {
    let (h, w) = img.dim();
    let mut buf = image::GrayImage::new(w as u32, h as u32);
    for ((r, c), &v) in img.indexed_iter() {
        buf.put_pixel(c as u32, r as u32, image::Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8]));
    }
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Save an RGB image given three channel planes in `[0, 1]`.
pub fn save_rgb(rgb: &[Gray; 3], path: &Path) -> Result<()> {
    let (h, w) = rgb[0].dim();
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for r in 0..h {
        for c in 0..w {
            let px = [
                (rgb[0][[r, c]].clamp(0.0, 1.0) * 255.0).round() as u8,
                (rgb[1][[r, c]].clamp(0.0, 1.0) * 255.0).round() as u8,
                (rgb[2][[r, c]].clamp(0.0, 1.0) * 255.0).round() as u8,
            ];
            buf.put_pixel(c as u32, r as u32, image::Rgb(px));
        }
    }
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Bilinear sample with clamped coordinates; `(y, x)` in pixel units where
/// integer coordinates land on pixel centers.
pub fn bilinear(img: &Gray, y: f64, x: f64) -> f64 {
    let (h, w) = img.dim();
    let xc = x.clamp(0.0, (w - 1) as f64);
    let yc = y.clamp(0.0, (h - 1) as f64);
    let x0 = xc.floor() as usize;
    let y0 = yc.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = xc - x0 as f64;
    let fy = yc - y0 as f64;
    let top = img[[y0, x0]] * (1.0 - fx) + img[[y0, x1]] * fx;
    let bot = img[[y1, x0]] * (1.0 - fx) + img[[y1, x1]] * fx;
    top * (1.0 - fy) + bot * fy
}

/// Bilinear sample that returns `fill` outside the image bounds.
pub fn bilinear_or(img: &Gray, y: f64, x: f64, fill: f64) -> f64 {
    let (h, w) = img.dim();
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return fill;
    }
    bilinear(img, y, x)
}

/// Bilinear resize to the given dimensions.
pub fn resize(img: &Gray, out_h: usize, out_w: usize) -> Gray {
    let (h, w) = img.dim();
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    Array2::from_shape_fn((out_h, out_w), |(r, c)| {
        let y = (r as f64 + 0.5) * sy - 0.5;
        let x = (c as f64 + 0.5) * sx - 0.5;
        bilinear(img, y, x)
    })
}

/// Connected components of a boolean mask (8-connectivity). Returns a label
/// grid (`usize::MAX` for background) and the number of components; labels
/// are assigned in scan order so the result is deterministic.
pub fn connected_components(mask: &Mask) -> (Array2<usize>, usize) {
    let (h, w) = mask.dim();
    let mut labels = Array2::from_elem((h, w), usize::MAX);
    let mut next = 0usize;
    let mut stack = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if !mask[[r, c]] || labels[[r, c]] != usize::MAX {
                continue;
            }
            labels[[r, c]] = next;
            stack.push((r, c));
            while let Some((pr, pc)) = stack.pop() {
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let nr = pr as i64 + dr;
                        let nc = pc as i64 + dc;
                        if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                            continue;
                        }
                        let (nr, nc) = (nr as usize, nc as usize);
                        if mask[[nr, nc]] && labels[[nr, nc]] == usize::MAX {
                            labels[[nr, nc]] = next;
                            stack.push((nr, nc));
                        }
                    }
                }
            }
            next += 1;
        }
    }
    (labels, next)
}
