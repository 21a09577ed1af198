//! Procedural eight-class dataset generator for desk-scale runs.
//!
//! Each class pairs a distinct base-hue band with a class-specific lesion
//! motif (spots, stripes, rings, blotches, ...). Per-image jitter in hue,
//! motif placement, and pixel noise keeps images within a class varied, so
//! a classifier has to learn the class structure rather than memorize
//! byte patterns.

use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const SYNTHETIC_CLASS_NAMES: [&str; 8] = [
    "Corn_Grey_Leaf_Spot",
    "Potato_Early_Blight",
    "Potato_Late_Blight",
    "Rice_Bacterial_Blight",
    "Rice_Brown_Spot",
    "Tomato_Early_Blight",
    "Wheat_Brown_Rust",
    "Wheat_Yellow_Rust",
];

fn hsv_to_rgb(h: f32, s: f32, v: f32) -> [f32; 3] {
    let h = h.rem_euclid(360.0) / 60.0;
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0]
}

struct Canvas {
    size: usize,
    px: Vec<f32>, // rgb rows
}

impl Canvas {
    fn filled(size: usize, color: [f32; 3]) -> Self {
        let mut px = Vec::with_capacity(size * size * 3);
        for _ in 0..size * size {
            px.extend(color);
        }
        Canvas { size, px }
    }

    fn paint(&mut self, y: usize, x: usize, color: [f32; 3]) {
        let off = (y * self.size + x) * 3;
        self.px[off..off + 3].copy_from_slice(&color);
    }

    fn paint_if(&mut self, color: [f32; 3], pred: impl Fn(usize, usize) -> bool) {
        for y in 0..self.size {
            for x in 0..self.size {
                if pred(y, x) {
                    self.paint(y, x, color);
                }
            }
        }
    }
}

fn disc(canvas: &mut Canvas, cy: f32, cx: f32, radius: f32, color: [f32; 3]) {
    let r2 = radius * radius;
    canvas.paint_if(color, |y, x| {
        let dy = y as f32 - cy;
        let dx = x as f32 - cx;
        dy * dy + dx * dx <= r2
    });
}

fn render_class(class: usize, size: usize, rng: &mut Rng) -> Result<image::RgbImage> {
    let s = size as f32;
    let hue = class as f32 * 45.0 + rng.next_uniform(-10.0f32, 10.0)?;
    let sat = rng.next_uniform(0.55f32, 0.8)?;
    let val = rng.next_uniform(0.5f32, 0.72)?;
    let base = hsv_to_rgb(hue, sat, val);
    // Lesions sit well away from the leaf hue and darker.
    let lesion = hsv_to_rgb(hue + 150.0, sat * 0.8, val * 0.45);
    let mut canvas = Canvas::filled(size, base);

    match class {
        0 => {
            // Round spots.
            let n = 4 + rng.next_below(4) as usize;
            for _ in 0..n {
                let cy = rng.next_uniform(0.0f32, s - 1.0)?;
                let cx = rng.next_uniform(0.0f32, s - 1.0)?;
                let r = rng.next_uniform(0.06f32 * s, 0.12 * s)?;
                disc(&mut canvas, cy, cx, r, lesion);
            }
        }
        1 => {
            // Horizontal stripes.
            let period = (size / (4 + rng.next_below(3) as usize)).max(3);
            let phase = rng.next_below(period as u32) as usize;
            let thick = (period / 3).max(1);
            canvas.paint_if(lesion, |y, _| (y + phase) % period < thick);
        }
        2 => {
            // Vertical stripes.
            let period = (size / (4 + rng.next_below(3) as usize)).max(3);
            let phase = rng.next_below(period as u32) as usize;
            let thick = (period / 3).max(1);
            canvas.paint_if(lesion, |_, x| (x + phase) % period < thick);
        }
        3 => {
            // Diagonal stripes.
            let period = (size / (4 + rng.next_below(3) as usize)).max(3);
            let phase = rng.next_below(period as u32) as usize;
            let thick = (period / 3).max(1);
            canvas.paint_if(lesion, |y, x| (y + x + phase) % period < thick);
        }
        4 => {
            // Concentric rings.
            let cy = s / 2.0 + rng.next_uniform(-0.1f32 * s, 0.1 * s)?;
            let cx = s / 2.0 + rng.next_uniform(-0.1f32 * s, 0.1 * s)?;
            let thick = 0.035 * s;
            let radii = [0.15 * s, 0.3 * s, 0.45 * s];
            canvas.paint_if(lesion, |y, x| {
                let d = ((y as f32 - cy).powi(2) + (x as f32 - cx).powi(2)).sqrt();
                radii.iter().any(|&r| (d - r).abs() <= thick)
            });
        }
        5 => {
            // A few large elliptical blotches.
            let n = 2 + rng.next_below(2) as usize;
            for _ in 0..n {
                let cy = rng.next_uniform(0.2f32 * s, 0.8 * s)?;
                let cx = rng.next_uniform(0.2f32 * s, 0.8 * s)?;
                let ay = rng.next_uniform(0.12f32 * s, 0.25 * s)?;
                let ax = rng.next_uniform(0.12f32 * s, 0.25 * s)?;
                canvas.paint_if(lesion, |y, x| {
                    let dy = (y as f32 - cy) / ay;
                    let dx = (x as f32 - cx) / ax;
                    dy * dy + dx * dx <= 1.0
                });
            }
        }
        6 => {
            // Checkerboard patches.
            let cell = (size / (3 + rng.next_below(2) as usize)).max(2);
            let parity = rng.next_below(2) as usize;
            canvas.paint_if(lesion, |y, x| (y / cell + x / cell) % 2 == parity);
        }
        _ => {
            // Dot grid.
            let step = (size / (5 + rng.next_below(2) as usize)).max(4);
            let jy = rng.next_below(step as u32) as f32;
            let jx = rng.next_below(step as u32) as f32;
            let r = 0.035 * s + 1.0;
            let mut cy = jy;
            while cy < s {
                let mut cx = jx;
                while cx < s {
                    disc(&mut canvas, cy, cx, r, lesion);
                    cx += step as f32;
                }
                cy += step as f32;
            }
        }
    }

    // Per-pixel noise so no two images are byte-equal.
    let mut img = image::RgbImage::new(size as u32, size as u32);
    for y in 0..size {
        for x in 0..size {
            let off = (y * size + x) * 3;
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let noise = rng.next_uniform(-14.0f32, 14.0)?;
                rgb[c] = (canvas.px[off + c] + noise).clamp(0.0, 255.0) as u8;
            }
            img.put_pixel(x as u32, y as u32, image::Rgb(rgb));
        }
    }
    Ok(img)
}

/// Writes `per_class` PNGs of `size` x `size` pixels into one directory per
/// class under `out_dir`. Returns the number of files written. The same
/// seed produces a byte-identical tree.
pub fn gen_synthetic(out_dir: &Path, per_class: usize, size: usize, seed: u64) -> Result<usize> {
    if per_class == 0 {
        return Err(Error::argument("per_class must be >= 1"));
    }
    if size < 16 {
        return Err(Error::argument("size must be >= 16"));
    }
    let mut written = 0;
    for (class, name) in SYNTHETIC_CLASS_NAMES.iter().enumerate() {
        let dir = out_dir.join(name);
        std::fs::create_dir_all(&dir)?;
        let mut rng = Rng::new(seed, 0x100 + class as u64);
        for i in 0..per_class {
            let img = render_class(class, size, &mut rng)?;
            let path = dir.join(format!("img_{i:04}.png"));
            img.save_with_format(&path, image::ImageFormat::Png)
                .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
            written += 1;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_expected_tree() {
        let dir = tempfile::tempdir().unwrap();
        let n = gen_synthetic(dir.path(), 3, 16, 7).unwrap();
        assert_eq!(n, 24);
        for name in SYNTHETIC_CLASS_NAMES {
            let class_dir = dir.path().join(name);
            let count = std::fs::read_dir(&class_dir).unwrap().count();
            assert_eq!(count, 3, "{name}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        gen_synthetic(a.path(), 2, 16, 99).unwrap();
        gen_synthetic(b.path(), 2, 16, 99).unwrap();
        for name in SYNTHETIC_CLASS_NAMES {
            for i in 0..2 {
                let fa = a.path().join(name).join(format!("img_{i:04}.png"));
                let fb = b.path().join(name).join(format!("img_{i:04}.png"));
                assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap());
            }
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(gen_synthetic(dir.path(), 0, 32, 1).is_err());
        assert!(gen_synthetic(dir.path(), 1, 8, 1).is_err());
    }
}
