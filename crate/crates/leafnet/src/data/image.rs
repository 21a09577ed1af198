//! Image decoding, bilinear resizing, and batch tensor assembly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A decoded image: three channels, row-major (y, x, c), values in
/// `[0, 255]` as reals. This is the raw form before the model's Rescale
/// layer maps pixels to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::argument("image dimensions must be >= 1"));
        }
        if pixels.len() != height * width * 3 {
            return Err(Error::argument(format!(
                "expected {} pixel values, got {}",
                height * width * 3,
                pixels.len()
            )));
        }
        Ok(ImageBuffer {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize, c: usize) -> f32 {
        self.pixels[(y * self.width + x) * 3 + c]
    }
}

/// Decodes a PNG or JPEG byte stream. 8-bit channels are widened to reals
/// in `[0, 255]`; grayscale is replicated to three channels; alpha dropped.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let img = image::load_from_memory(bytes)
        .map_err(|e| Error::Decode(format!("cannot decode image: {e}")))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.as_raw().iter().map(|&b| b as f32).collect();
    ImageBuffer::new(h as usize, w as usize, pixels)
}

/// Reads and decodes one file, naming the file in any error.
pub fn decode_file(path: &std::path::Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode(msg) => Error::Decode(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Bilinear resize with half-pixel centers: the source coordinate for
/// destination index `d` is `(d + 0.5) * (in / out) - 0.5`, clamped to the
/// valid range, then blended from the four neighbors per channel.
pub fn resize_bilinear(img: &ImageBuffer, out_h: usize, out_w: usize) -> Result<ImageBuffer> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::argument("resize target must be >= 1"));
    }
    if out_h == img.height && out_w == img.width {
        return Ok(img.clone());
    }
    let (ih, iw) = (img.height, img.width);
    let scale_y = ih as f32 / out_h as f32;
    let scale_x = iw as f32 / out_w as f32;
    let mut out = vec![0.0f32; out_h * out_w * 3];
    for dy in 0..out_h {
        let sy = ((dy as f32 + 0.5) * scale_y - 0.5).clamp(0.0, (ih - 1) as f32);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(ih - 1);
        let fy = sy - y0 as f32;
        for dx in 0..out_w {
            let sx = ((dx as f32 + 0.5) * scale_x - 0.5).clamp(0.0, (iw - 1) as f32);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(iw - 1);
            let fx = sx - x0 as f32;
            for c in 0..3 {
                let top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
                let bottom = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
                out[(dy * out_w + dx) * 3 + c] = top * (1.0 - fy) + bottom * fy;
            }
        }
    }
    ImageBuffer::new(out_h, out_w, out)
}

/// Stacks same-sized images into an (N,H,W,C) tensor of raw pixel values.
pub fn batch_to_tensor<T: Scalar>(images: &[ImageBuffer]) -> Result<Tensor<T>> {
    let first = images
        .first()
        .ok_or_else(|| Error::argument("empty batch"))?;
    let (h, w) = (first.height, first.width);
    let mut data = Vec::with_capacity(images.len() * h * w * 3);
    for img in images {
        if img.height != h || img.width != w {
            return Err(Error::shape("batch images must share dimensions"));
        }
        data.extend(img.pixels().iter().map(|&v| T::from_f64(v as f64)));
    }
    Tensor::from_vec(&[images.len(), h, w, 3], data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_png(img: &image::RgbImage) -> Vec<u8> {
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .unwrap();
        bytes
    }

    #[test]
    fn decode_single_red_pixel() {
        let mut img = image::RgbImage::new(1, 1);
        img.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        let buf = decode_image(&encode_png(&img)).unwrap();
        assert_eq!((buf.height(), buf.width()), (1, 1));
        assert_eq!(buf.pixels(), &[255.0, 0.0, 0.0]);
    }

    #[test]
    fn grayscale_replicates_channels() {
        let img = image::GrayImage::from_pixel(2, 2, image::Luma([128]));
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .unwrap();
        let buf = decode_image(&bytes).unwrap();
        assert!(buf.pixels().iter().all(|&v| v == 128.0));
        assert_eq!(buf.pixels().len(), 2 * 2 * 3);
    }

    #[test]
    fn truncated_stream_is_a_decode_error() {
        let mut img = image::RgbImage::new(8, 8);
        img.put_pixel(0, 0, image::Rgb([1, 2, 3]));
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Jpeg,
        )
        .unwrap();
        bytes.truncate(bytes.len() / 2);
        assert!(matches!(decode_image(&bytes), Err(Error::Decode(_))));
    }

    #[test]
    fn resize_identity() {
        let buf = ImageBuffer::new(2, 3, (0..18).map(|v| v as f32).collect()).unwrap();
        let out = resize_bilinear(&buf, 2, 3).unwrap();
        assert_eq!(out, buf);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let buf = ImageBuffer::new(5, 7, vec![42.0; 5 * 7 * 3]).unwrap();
        for (h, w) in [(1, 1), (3, 3), (10, 4), (180, 180)] {
            let out = resize_bilinear(&buf, h, w).unwrap();
            assert!(out.pixels().iter().all(|&v| (v - 42.0).abs() < 1e-4));
        }
    }

    #[test]
    fn resize_2x2_to_center_sample() {
        // Hand evaluation of the half-pixel formula: the single output
        // sample lands exactly between all four inputs, so each weighs 1/4.
        let mut pixels = Vec::new();
        for v in [0.0f32, 100.0, 200.0, 300.0] {
            pixels.extend([v, v, v]);
        }
        let buf = ImageBuffer::new(2, 2, pixels).unwrap();
        let out = resize_bilinear(&buf, 1, 1).unwrap();
        assert_eq!(out.pixels(), &[150.0, 150.0, 150.0]);
    }

    #[test]
    fn batch_tensor_layout() {
        let a = ImageBuffer::new(2, 2, (0..12).map(|v| v as f32).collect()).unwrap();
        let b = ImageBuffer::new(2, 2, (12..24).map(|v| v as f32).collect()).unwrap();
        let t: Tensor<f32> = batch_to_tensor(&[a, b]).unwrap();
        assert_eq!(t.dims(), &[2, 2, 2, 3]);
        assert_eq!(t.data()[12], 12.0);

        let c = ImageBuffer::new(1, 2, vec![0.0; 6]).unwrap();
        let d = ImageBuffer::new(2, 1, vec![0.0; 6]).unwrap();
        assert!(batch_to_tensor::<f32>(&[c, d]).is_err());
    }
}
