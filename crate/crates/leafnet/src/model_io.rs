//! Binary model container.
//!
//! Layout (all integers little-endian):
//! - magic `LEAFNET1` (8 bytes)
//! - format version, u16
//! - input shape: rank u8, then one u32 per dimension
//! - class-name table: count u16, then per name a u16 length + UTF-8 bytes
//! - layer list: count u16, then per layer a type tag u8 plus its
//!   hyperparameters as u32s (Rescale stores the factor as f32 bits)
//! - weights as f32, in layer order, weights-then-bias per layer
//! - CRC32 (IEEE) of all preceding bytes, u32

use std::path::Path;

use crate::error::{Error, ModelFileError, Result};
use crate::nn::{Activation, LayerSpec, Model};
use crate::tensor::{Shape, Tensor};

pub const MAGIC: &[u8; 8] = b"LEAFNET1";
pub const FORMAT_VERSION: u16 = 1;

const TAG_RESCALE: u8 = 0;
const TAG_CONV2D: u8 = 1;
const TAG_MAXPOOL: u8 = 2;
const TAG_FLATTEN: u8 = 3;
const TAG_DENSE: u8 = 4;
const TAG_SOFTMAX: u8 = 5;

/// A model read back from disk, with the class table and the container
/// checksum (usable as a short model identifier).
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model<f32>,
    pub class_names: Vec<String>,
    pub checksum: u32,
}

fn push_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Serializes a model plus its class table to the container format.
pub fn encode_model(model: &Model<f32>, class_names: &[String]) -> Result<Vec<u8>> {
    if class_names.len() != model.classes() {
        return Err(Error::argument(format!(
            "{} class names for a {}-class model",
            class_names.len(),
            model.classes()
        )));
    }
    if class_names.len() > u16::MAX as usize || model.layers().len() > u16::MAX as usize {
        return Err(Error::argument("model too large for the container format"));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    push_u16(&mut out, FORMAT_VERSION);

    let dims = model.input_shape().dims();
    out.push(dims.len() as u8);
    for &d in dims {
        push_u32(&mut out, d as u32);
    }

    push_u16(&mut out, class_names.len() as u16);
    for name in class_names {
        let bytes = name.as_bytes();
        if bytes.len() > u16::MAX as usize {
            return Err(Error::argument("class name too long"));
        }
        push_u16(&mut out, bytes.len() as u16);
        out.extend_from_slice(bytes);
    }

    push_u16(&mut out, model.layers().len() as u16);
    for layer in model.layers() {
        match layer {
            LayerSpec::Rescale { factor } => {
                out.push(TAG_RESCALE);
                push_u32(&mut out, (*factor as f32).to_bits());
            }
            LayerSpec::Conv2D { filters } => {
                out.push(TAG_CONV2D);
                push_u32(&mut out, *filters as u32);
            }
            LayerSpec::MaxPool => out.push(TAG_MAXPOOL),
            LayerSpec::Flatten => out.push(TAG_FLATTEN),
            LayerSpec::Dense { units, activation } => {
                out.push(TAG_DENSE);
                push_u32(&mut out, *units as u32);
                push_u32(
                    &mut out,
                    match activation {
                        Activation::Relu => 0,
                        Activation::Linear => 1,
                    },
                );
            }
            LayerSpec::SoftmaxOutput { classes } => {
                out.push(TAG_SOFTMAX);
                push_u32(&mut out, *classes as u32);
            }
        }
    }

    for entry in model.params().iter().flatten() {
        for tensor in [&entry.weights, &entry.bias] {
            for &v in tensor.data() {
                push_u32(&mut out, v.to_bits());
            }
        }
    }

    let crc = crc32fast::hash(&out);
    push_u32(&mut out, crc);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], ModelFileError> {
        if self.pos + n > self.bytes.len() {
            return Err(ModelFileError::Truncated);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> std::result::Result<u8, ModelFileError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> std::result::Result<u16, ModelFileError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> std::result::Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Parses and validates a container, rebuilding the model. The stored CRC
/// must match, shapes must be consistent, and the weight payload must hold
/// exactly the number of floats the layer list implies.
pub fn decode_model(bytes: &[u8]) -> std::result::Result<LoadedModel, ModelFileError> {
    if bytes.len() < MAGIC.len() + 2 + 4 {
        return Err(ModelFileError::Truncated);
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let payload = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(ModelFileError::CrcMismatch { stored, computed });
    }

    let mut cur = Cursor {
        bytes: payload,
        pos: MAGIC.len(),
    };
    let version = cur.u16()?;
    if version != FORMAT_VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }

    let rank = cur.u8()? as usize;
    let mut dims = Vec::with_capacity(rank);
    for _ in 0..rank {
        dims.push(cur.u32()? as usize);
    }
    let input_shape = Shape::new(&dims)
        .map_err(|e| ModelFileError::Malformed(format!("input shape: {e}")))?;

    let class_count = cur.u16()? as usize;
    let mut class_names = Vec::with_capacity(class_count);
    for _ in 0..class_count {
        let len = cur.u16()? as usize;
        let raw = cur.take(len)?;
        let name = std::str::from_utf8(raw)
            .map_err(|_| ModelFileError::Malformed("class name is not UTF-8".into()))?;
        class_names.push(name.to_string());
    }

    let layer_count = cur.u16()? as usize;
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let layer = match cur.u8()? {
            TAG_RESCALE => LayerSpec::Rescale {
                factor: f32::from_bits(cur.u32()?) as f64,
            },
            TAG_CONV2D => LayerSpec::Conv2D {
                filters: cur.u32()? as usize,
            },
            TAG_MAXPOOL => LayerSpec::MaxPool,
            TAG_FLATTEN => LayerSpec::Flatten,
            TAG_DENSE => LayerSpec::Dense {
                units: cur.u32()? as usize,
                activation: match cur.u32()? {
                    0 => Activation::Relu,
                    1 => Activation::Linear,
                    other => {
                        return Err(ModelFileError::Malformed(format!(
                            "unknown activation tag {other}"
                        )))
                    }
                },
            },
            TAG_SOFTMAX => LayerSpec::SoftmaxOutput {
                classes: cur.u32()? as usize,
            },
            other => {
                return Err(ModelFileError::Malformed(format!(
                    "unknown layer tag {other}"
                )))
            }
        };
        layers.push(layer);
    }

    let mut model = Model::<f32>::zeros(input_shape, layers)
        .map_err(|e| ModelFileError::Malformed(format!("invalid layer stack: {e}")))?;
    if model.classes() != class_count {
        return Err(ModelFileError::Malformed(format!(
            "class table has {class_count} entries but the output layer has {}",
            model.classes()
        )));
    }

    let expected_floats = model.param_count();
    if cur.remaining() != expected_floats * 4 {
        return Err(ModelFileError::Malformed(format!(
            "weight payload holds {} bytes, layer shapes imply {}",
            cur.remaining(),
            expected_floats * 4
        )));
    }
    let mut params = model.params().clone();
    for entry in params.iter_mut().flatten() {
        for tensor in [&mut entry.weights, &mut entry.bias] {
            fill_tensor(tensor, &mut cur)?;
        }
    }
    model
        .set_params(params)
        .map_err(|e| ModelFileError::Malformed(e.to_string()))?;

    Ok(LoadedModel {
        model,
        class_names,
        checksum: stored,
    })
}

fn fill_tensor(
    tensor: &mut Tensor<f32>,
    cur: &mut Cursor<'_>,
) -> std::result::Result<(), ModelFileError> {
    for v in tensor.data_mut() {
        *v = f32::from_bits(cur.u32()?);
    }
    Ok(())
}

/// Writes the container; returns its CRC32 checksum.
pub fn save_model(model: &Model<f32>, class_names: &[String], path: &Path) -> Result<u32> {
    let bytes = encode_model(model, class_names)?;
    let crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    std::fs::write(path, bytes)?;
    Ok(crc)
}

/// Reads and validates a container from disk.
pub fn load_model(path: &Path) -> std::result::Result<LoadedModel, ModelFileError> {
    let bytes = std::fs::read(path)?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{classifier_layers, Mode};
    use crate::rng::Rng;
    use crate::tensor::shape;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("class_{i}")).collect()
    }

    fn small_model(seed: u64) -> Model<f32> {
        let mut rng = Rng::seeded(seed);
        Model::init(shape(&[16, 16, 3]), classifier_layers(4), &mut rng).unwrap()
    }

    #[test]
    fn round_trip_preserves_predictions_bitwise() {
        let model = small_model(1);
        let bytes = encode_model(&model, &names(4)).unwrap();
        let loaded = decode_model(&bytes).unwrap();
        assert_eq!(loaded.class_names, names(4));

        let mut rng = Rng::seeded(2);
        let mut batch = Tensor::zeros(&[2, 16, 16, 3]).unwrap();
        for v in batch.data_mut() {
            *v = rng.next_uniform(0.0f32, 255.0).unwrap();
        }
        let a = model.forward(&batch, Mode::Eval).unwrap();
        let b = loaded.model.forward(&batch, Mode::Eval).unwrap();
        assert_eq!(a.probabilities().data(), b.probabilities().data());
    }

    #[test]
    fn flipped_payload_byte_fails_crc() {
        let model = small_model(3);
        let mut bytes = encode_model(&model, &names(4)).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x10;
        assert!(matches!(
            decode_model(&bytes),
            Err(ModelFileError::CrcMismatch { .. })
        ));
    }

    #[test]
    fn bad_magic_and_version_and_truncation() {
        let model = small_model(4);
        let good = encode_model(&model, &names(4)).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_model(&bad), Err(ModelFileError::BadMagic)));

        // Bump the version and re-seal the CRC so only the version is wrong.
        let mut bad = good.clone();
        bad[8] = 9;
        let len = bad.len();
        let crc = crc32fast::hash(&bad[..len - 4]);
        bad[len - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(
            decode_model(&bad),
            Err(ModelFileError::UnsupportedVersion(9))
        ));

        let truncated = &good[..10];
        assert!(matches!(
            decode_model(truncated),
            Err(ModelFileError::Truncated)
        ));
    }

    #[test]
    fn missing_weights_are_malformed() {
        // Drop one trailing weight (4 bytes) and re-seal the CRC.
        let model = small_model(5);
        let good = encode_model(&model, &names(4)).unwrap();
        let mut bad = good[..good.len() - 8].to_vec();
        let crc = crc32fast::hash(&bad);
        bad.extend_from_slice(&crc.to_le_bytes());
        assert!(matches!(
            decode_model(&bad),
            Err(ModelFileError::Malformed(_))
        ));
    }

    #[test]
    fn save_load_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.leaf");
        let model = small_model(6);
        let crc = save_model(&model, &names(4), &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.checksum, crc);
        assert_eq!(loaded.model.param_count(), model.param_count());
    }

    #[test]
    fn container_size_tracks_parameter_count() {
        // Weights dominate: the file is within a few hundred bytes of
        // 4 bytes per parameter.
        let model = small_model(7);
        let bytes = encode_model(&model, &names(4)).unwrap();
        let payload = model.param_count() * 4;
        assert!(bytes.len() > payload);
        assert!(bytes.len() < payload + 512);
    }
}
