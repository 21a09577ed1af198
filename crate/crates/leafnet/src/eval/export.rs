//! CSV export with bitwise-stable formatting: fixed six-decimal reals and
//! `\n` line endings.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::tsne::EmbeddingProjection;
use crate::eval::ConfusionMatrix;
use crate::scalar::Scalar;
use crate::train::EpochRecord;

pub const METRICS_HEADER: &str = "epoch,train_loss,train_acc,val_loss,val_acc,duration_s";

pub fn metrics_csv_string(records: &[EpochRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc, r.duration_seconds
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Writes the per-epoch metrics CSV.
pub fn write_metrics_csv(records: &[EpochRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::argument("no epoch records to export"));
    }
    std::fs::write(path, metrics_csv_string(records))?;
    Ok(())
}

/// Parses a metrics CSV back into records (six-decimal precision).
pub fn parse_metrics_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::argument(format!(
                "unexpected metrics header: {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::argument(format!("metrics row {i} malformed")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::argument(format!("metrics row {i}: {e}")))
        };
        records.push(EpochRecord {
            epoch: fields[0]
                .parse()
                .map_err(|e| Error::argument(format!("metrics row {i}: {e}")))?,
            train_loss: parse(fields[1])?,
            train_acc: parse(fields[2])?,
            val_loss: parse(fields[3])?,
            val_acc: parse(fields[4])?,
            duration_seconds: parse(fields[5])?,
        });
    }
    Ok(records)
}

pub fn confusion_csv_string(cm: &ConfusionMatrix) -> String {
    let mut out = cm.class_names().join(",");
    out.push('\n');
    for t in 0..cm.k() {
        for p in 0..cm.k() {
            if p > 0 {
                out.push(',');
            }
            write!(out, "{}", cm.at(t, p)).expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Writes the confusion matrix CSV: a header row of class names, then K
/// rows of counts (row = true class).
pub fn write_confusion_csv(cm: &ConfusionMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, confusion_csv_string(cm))?;
    Ok(())
}

/// Writes both evaluation artifacts into `dir` as `metrics.csv` and
/// `confusion.csv`.
pub fn export_metrics(records: &[EpochRecord], cm: &ConfusionMatrix, dir: &Path) -> Result<()> {
    write_metrics_csv(records, &dir.join("metrics.csv"))?;
    write_confusion_csv(cm, &dir.join("confusion.csv"))?;
    Ok(())
}

/// Writes the embedding CSV: `x,y,label,class_name`, one row per sample.
pub fn write_embeddings_csv<T: Scalar>(
    projection: &EmbeddingProjection<T>,
    class_names: &[String],
    path: &Path,
) -> Result<()> {
    let n = projection.points.dims()[0];
    if projection.labels.len() != n {
        return Err(Error::argument("projection labels do not match points"));
    }
    let mut out = String::from("x,y,label,class_name\n");
    for i in 0..n {
        let label = projection.labels[i];
        let name = class_names
            .get(label)
            .ok_or_else(|| Error::argument(format!("label {label} has no class name")))?;
        writeln!(
            out,
            "{:.6},{:.6},{},{}",
            projection.points.data()[i * 2].as_f64(),
            projection.points.data()[i * 2 + 1].as_f64(),
            label,
            name
        )
        .expect("writing to a String cannot fail");
    }
    std::fs::write(path, out)?;
    Ok(())
}
