//! Random training-time augmentation: horizontal flip, rotation, zoom.
//!
//! Augmentation lives in the data pipeline (training batches only), never in
//! the model, so eval-mode forward passes stay pure.

use crate::data::image::ImageBuffer;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Augmentation settings. `rotation_factor` is a fraction of a full turn
/// (0.1 means angles uniform in +/- 0.1 * 2pi); `zoom_factor` z draws a
/// scale uniform in `[1-z, 1+z]`. Out-of-frame samples use reflect fill.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub horizontal_flip: bool,
    pub rotation_factor: f32,
    pub zoom_factor: f32,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            horizontal_flip: true,
            rotation_factor: 0.1,
            zoom_factor: 0.1,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rotation_factor", self.rotation_factor),
            ("zoom_factor", self.zoom_factor),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::argument(format!("{name} must be in [0,1), got {v}")));
            }
        }
        Ok(())
    }

    /// Generator seeded from the config.
    pub fn rng(&self) -> Rng {
        Rng::new(self.seed, 0x41)
    }

    fn is_identity(&self) -> bool {
        !self.horizontal_flip && self.rotation_factor == 0.0 && self.zoom_factor == 0.0
    }
}

/// Reflects an integer index into `[0, n)` (mirror at the borders, edge
/// pixel included).
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i % period;
    if m < 0 {
        m += period;
    }
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

fn sample_reflect(img: &ImageBuffer, sy: f32, sx: f32, c: usize) -> f32 {
    let y0 = sy.floor();
    let x0 = sx.floor();
    let fy = sy - y0;
    let fx = sx - x0;
    let (y0, x0) = (y0 as isize, x0 as isize);
    let h = img.height();
    let w = img.width();
    let ya = reflect(y0, h);
    let yb = reflect(y0 + 1, h);
    let xa = reflect(x0, w);
    let xb = reflect(x0 + 1, w);
    let top = img.at(ya, xa, c) * (1.0 - fx) + img.at(ya, xb, c) * fx;
    let bottom = img.at(yb, xa, c) * (1.0 - fx) + img.at(yb, xb, c) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Exact column reversal; applying it twice restores the original image.
pub fn mirror_horizontal(img: &ImageBuffer) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let mut out = vec![0.0f32; h * w * 3];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                out[(y * w + x) * 3 + c] = img.at(y, w - 1 - x, c);
            }
        }
    }
    ImageBuffer::new(h, w, out).expect("same dims")
}

/// Rotation about the image center with reflect fill and bilinear
/// resampling. Positive angles rotate content toward increasing y.
fn rotate(img: &ImageBuffer, angle: f32) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let cy = (h as f32 - 1.0) / 2.0;
    let cx = (w as f32 - 1.0) / 2.0;
    let (sin, cos) = angle.sin_cos();
    let mut out = vec![0.0f32; h * w * 3];
    for y in 0..h {
        let v = y as f32 - cy;
        for x in 0..w {
            let u = x as f32 - cx;
            let su = cos * u + sin * v;
            let sv = -sin * u + cos * v;
            let sy = sv + cy;
            let sx = su + cx;
            for c in 0..3 {
                out[(y * w + x) * 3 + c] = sample_reflect(img, sy, sx, c);
            }
        }
    }
    ImageBuffer::new(h, w, out).expect("same dims")
}

/// Center zoom by `scale` (> 1 magnifies), reflect fill.
fn zoom(img: &ImageBuffer, scale: f32) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let cy = (h as f32 - 1.0) / 2.0;
    let cx = (w as f32 - 1.0) / 2.0;
    let inv = 1.0 / scale;
    let mut out = vec![0.0f32; h * w * 3];
    for y in 0..h {
        let sy = (y as f32 - cy) * inv + cy;
        for x in 0..w {
            let sx = (x as f32 - cx) * inv + cx;
            for c in 0..3 {
                out[(y * w + x) * 3 + c] = sample_reflect(img, sy, sx, c);
            }
        }
    }
    ImageBuffer::new(h, w, out).expect("same dims")
}

/// Applies flip, rotation, and zoom independently per image, drawing from
/// `rng` in that fixed order. The identity configuration returns the batch
/// bit-for-bit unchanged.
pub fn augment(
    images: &[ImageBuffer],
    config: &AugmentConfig,
    rng: &mut Rng,
) -> Result<Vec<ImageBuffer>> {
    config.validate()?;
    if config.is_identity() {
        return Ok(images.to_vec());
    }
    let two_pi = std::f32::consts::PI * 2.0;
    let mut out = Vec::with_capacity(images.len());
    for img in images {
        let mut current = img.clone();
        if config.horizontal_flip && rng.next_uniform(0.0f32, 1.0)? < 0.5 {
            current = mirror_horizontal(&current);
        }
        if config.rotation_factor > 0.0 {
            let limit = config.rotation_factor * two_pi;
            let angle = rng.next_uniform(-limit, limit)?;
            current = rotate(&current, angle);
        }
        if config.zoom_factor > 0.0 {
            let scale = rng.next_uniform(1.0 - config.zoom_factor, 1.0 + config.zoom_factor)?;
            current = zoom(&current, scale);
        }
        out.push(current);
    }
    Ok(out)
}
