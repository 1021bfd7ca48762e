//! Big-endian IDX files (MNIST layout).

use std::path::Path;

use super::{meta, DataError, Dataset, Targets};

const MAGIC_IMAGES: u32 = 0x0000_0803;
const MAGIC_LABELS: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, DataError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| DataError::Idx {
            offset,
            message: "truncated header".into(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DataError> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(DataError::Idx {
            offset: 0,
            message: format!("unexpected magic 0x{magic:08x}, expected 0x{expected:08x}"),
        });
    }
    Ok(())
}

/// Parse an image file: returns `(count, rows * cols, pixels / 255)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), DataError> {
    check_magic(bytes, MAGIC_IMAGES)?;
    let n = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let d = rows * cols;
    let body = &bytes[16..];
    if body.len() < n * d {
        return Err(DataError::Idx {
            offset: bytes.len(),
            message: format!("truncated image data: expected {} bytes after header", n * d),
        });
    }
    let pixels = body[..n * d].iter().map(|&b| b as f64 / 255.0).collect();
    Ok((n, d, pixels))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    check_magic(bytes, MAGIC_LABELS)?;
    let n = read_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(DataError::Idx {
            offset: bytes.len(),
            message: format!("truncated label data: expected {n} bytes after header"),
        });
    }
    Ok(body[..n].to_vec())
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let images_path = images_path.as_ref();
    let (n, d, pixels) = parse_idx_images(&read_file(images_path)?)?;
    let labels = parse_idx_labels(&read_file(labels_path.as_ref())?)?;
    if labels.len() != n {
        return Err(DataError::Idx {
            offset: 4,
            message: format!("label count {} does not match image count {n}", labels.len()),
        });
    }
    let n_classes = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(1).max(10);
    Dataset::new(
        pixels,
        d,
        Targets::Class {
            labels: labels.into_iter().map(usize::from).collect(),
            n_classes,
        },
        meta(images_path.display().to_string()),
    )
}

/// Keep rows labeled `a` or `b` in their original order and relabel the
/// smaller digit to 0 and the larger to 1.
pub fn filter_digit_pair(data: &Dataset, a: usize, b: usize) -> Result<Dataset, DataError> {
    if a == b {
        return Err(DataError::Invalid(format!("digit pair needs two distinct digits (got {a}, {b})")));
    }
    let labels = data
        .labels()
        .ok_or_else(|| DataError::Invalid("digit filter needs class labels".into()))?;
    let (lo, hi) = (a.min(b), a.max(b));
    let keep: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == lo || labels[i] == hi)
        .collect();
    if keep.is_empty() {
        return Err(DataError::Invalid(format!("no rows labeled {lo} or {hi}")));
    }
    let picked = data.subset(&keep);
    let relabeled = keep.iter().map(|&i| usize::from(labels[i] == hi)).collect();
    let mut out = Dataset::new(
        (0..picked.len()).flat_map(|i| picked.row(i).to_vec()).collect(),
        data.n_features(),
        Targets::Class {
            labels: relabeled,
            n_classes: 2,
        },
        data.meta.clone(),
    )?;
    out.meta.source = format!("{}[{lo}{hi}]", data.meta.source);
    Ok(out)
}
