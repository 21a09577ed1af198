//! Dataset ingestion: directory scanning, train/validation splitting, and
//! deterministic batch iteration with per-epoch shuffling.

pub mod augment;
pub mod image;
pub mod synth;

pub use augment::{augment, mirror_horizontal, AugmentConfig};
pub use image::{batch_to_tensor, decode_file, decode_image, resize_bilinear, ImageBuffer};
pub use synth::{gen_synthetic, SYNTHETIC_CLASS_NAMES};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rng::{epoch_seed, Rng};

pub type LabeledFile = (PathBuf, usize);

/// Class table plus disjoint train/validation file lists.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub class_names: Vec<String>,
    pub train: Vec<LabeledFile>,
    pub val: Vec<LabeledFile>,
}

impl DatasetSplit {
    /// Scans `root` and splits it in one step.
    pub fn from_directory(root: &Path, val_split: f64, seed: u64) -> Result<Self> {
        let scan = scan_directory(root)?;
        let (train, val) = split_train_val(&scan.files, val_split, seed)?;
        Ok(DatasetSplit {
            class_names: scan.class_names,
            train,
            val,
        })
    }
}

/// Result of [`scan_directory`]: sorted class names, labeled files in
/// deterministic (class, filename) order, and how many non-image files were
/// skipped.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub class_names: Vec<String>,
    pub files: Vec<LabeledFile>,
    pub skipped: usize,
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "png" || e == "jpg" || e == "jpeg"
        })
        .unwrap_or(false)
}

/// Discovers a directory-per-class tree. Class names are the sorted
/// subdirectory names; labels are indices into that order.
pub fn scan_directory(root: &Path) -> Result<ScanResult> {
    if !root.is_dir() {
        return Err(Error::Dataset(format!(
            "dataset root {} is not a directory",
            root.display()
        )));
    }
    let mut class_dirs: Vec<(String, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if entry.path().is_dir() {
            class_dirs.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    class_dirs.sort_by(|a, b| a.0.cmp(&b.0));
    if class_dirs.len() < 2 {
        return Err(Error::Dataset(format!(
            "need at least 2 class directories under {}, found {}",
            root.display(),
            class_dirs.len()
        )));
    }
    let mut files = Vec::new();
    let mut skipped = 0;
    for (label, (name, dir)) in class_dirs.iter().enumerate() {
        let mut class_files: Vec<PathBuf> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if !path.is_file() {
                continue;
            }
            if has_image_extension(&path) {
                class_files.push(path);
            } else {
                skipped += 1;
            }
        }
        if class_files.is_empty() {
            return Err(Error::Dataset(format!("class directory {name} has no images")));
        }
        class_files.sort();
        files.extend(class_files.into_iter().map(|p| (p, label)));
    }
    Ok(ScanResult {
        class_names: class_dirs.into_iter().map(|(n, _)| n).collect(),
        files,
        skipped,
    })
}

/// Fisher-Yates shuffle of the file list with a generator seeded on `seed`;
/// the first `round(val_split * n)` files (clamped to keep both sides
/// non-empty) become the validation set.
pub fn split_train_val(
    files: &[LabeledFile],
    val_split: f64,
    seed: u64,
) -> Result<(Vec<LabeledFile>, Vec<LabeledFile>)> {
    if !(0.0 < val_split && val_split < 1.0) {
        return Err(Error::argument(format!(
            "val_split must be in (0,1), got {val_split}"
        )));
    }
    let n = files.len();
    if n < 2 {
        return Err(Error::Dataset(format!("need at least 2 files to split, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::seeded(seed);
    rng.shuffle(&mut order);
    let val_count = ((val_split * n as f64).round() as usize).clamp(1, n - 1);
    let val = order[..val_count]
        .iter()
        .map(|&i| files[i].clone())
        .collect();
    let train = order[val_count..]
        .iter()
        .map(|&i| files[i].clone())
        .collect();
    Ok((train, val))
}

/// Number of batches per epoch: `ceil(n / batch_size)`; the final partial
/// batch is kept.
pub fn num_batches(n: usize, batch_size: usize) -> usize {
    n.div_ceil(batch_size)
}

/// Iteration order for one epoch. Training epochs reshuffle with a seed
/// derived from `(base_seed, epoch)`; validation order is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchOrder {
    Shuffled { base_seed: u64, epoch: u64 },
    Sequential,
}

/// Per-epoch permutation of `0..n` for the given order.
pub fn epoch_order(n: usize, order: BatchOrder) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    if let BatchOrder::Shuffled { base_seed, epoch } = order {
        let mut rng = Rng::seeded(epoch_seed(base_seed, epoch));
        rng.shuffle(&mut indices);
    }
    indices
}

/// A decoded batch of images (raw `[0,255]` pixels) with labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub images: Vec<ImageBuffer>,
    pub labels: Vec<usize>,
}

/// Lazily decoding batch iterator: files are read, decoded, and resized to
/// `image_size` on demand, in the order fixed at construction.
pub struct BatchIter<'a> {
    files: &'a [LabeledFile],
    order: Vec<usize>,
    batch_size: usize,
    image_size: usize,
    cursor: usize,
}

impl<'a> BatchIter<'a> {
    pub fn len(&self) -> usize {
        num_batches(self.files.len(), self.batch_size)
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

impl<'a> Iterator for BatchIter<'a> {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let mut images = Vec::with_capacity(end - self.cursor);
        let mut labels = Vec::with_capacity(end - self.cursor);
        for &idx in &self.order[self.cursor..end] {
            let (path, label) = &self.files[idx];
            let img = match decode_file(path)
                .and_then(|img| resize_bilinear(&img, self.image_size, self.image_size))
            {
                Ok(img) => img,
                Err(e) => return Some(Err(e)),
            };
            images.push(img);
            labels.push(*label);
        }
        self.cursor = end;
        Some(Ok(Batch { images, labels }))
    }
}

/// Ordered batches over `files`, resized to `image_size` squares.
pub fn make_batches<'a>(
    files: &'a [LabeledFile],
    order: BatchOrder,
    batch_size: usize,
    image_size: usize,
) -> Result<BatchIter<'a>> {
    if batch_size == 0 {
        return Err(Error::argument("batch_size must be >= 1"));
    }
    if image_size == 0 {
        return Err(Error::argument("image_size must be >= 1"));
    }
    Ok(BatchIter {
        files,
        order: epoch_order(files.len(), order),
        batch_size,
        image_size,
        cursor: 0,
    })
}
