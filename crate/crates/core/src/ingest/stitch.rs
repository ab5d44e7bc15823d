//! Assembles a full matrix from routing-API blocks of at most 50×50.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::{DistanceMatrix, StationId};

/// Largest block side the routing API answers.
pub const MAX_BLOCK_DIM: usize = 50;

/// Distances from each of `row_ids` to each of `col_ids`, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixBlock {
    pub row_ids: Vec<StationId>,
    pub col_ids: Vec<StationId>,
    pub values: Vec<Vec<f64>>,
    /// Where the numbers came from, e.g. a routing profile name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl MatrixBlock {
    pub fn new(
        row_ids: Vec<StationId>,
        col_ids: Vec<StationId>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, IngestError> {
        let block = MatrixBlock {
            row_ids,
            col_ids,
            values,
            source: None,
        };
        block.validate()?;
        Ok(block)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.row_ids.len() > MAX_BLOCK_DIM || self.col_ids.len() > MAX_BLOCK_DIM {
            return Err(IngestError::MalformedBlock(format!(
                "{}x{} exceeds {MAX_BLOCK_DIM}x{MAX_BLOCK_DIM}",
                self.row_ids.len(),
                self.col_ids.len()
            )));
        }
        if self.values.len() != self.row_ids.len()
            || self.values.iter().any(|r| r.len() != self.col_ids.len())
        {
            return Err(IngestError::MalformedBlock(
                "value grid does not match row/column ids".into(),
            ));
        }
        if let Some(v) = self
            .values
            .iter()
            .flatten()
            .find(|v| !v.is_finite() || **v < 0.0)
        {
            return Err(IngestError::MalformedBlock(format!(
                "distance {v} is negative or not finite"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StitchReport {
    pub blocks: usize,
    /// Cells written more than once (last write wins).
    pub overlapping_writes: usize,
    /// Overlapping writes whose value differed from the earlier one.
    pub conflicting_writes: usize,
}

pub fn stitch(blocks: &[MatrixBlock], n: usize) -> Result<DistanceMatrix, IngestError> {
    stitch_with_report(blocks, n).map(|(m, _)| m)
}

/// Copies every block into an `n×n` grid in order. Later blocks overwrite
/// earlier ones, the diagonal is forced to zero, and any off-diagonal cell no
/// block wrote fails the stitch. `d[i][j]` is never derived from `d[j][i]`.
pub fn stitch_with_report(
    blocks: &[MatrixBlock],
    n: usize,
) -> Result<(DistanceMatrix, StitchReport), IngestError> {
    let mut grid = vec![0.0f64; n * n];
    let mut written = vec![false; n * n];
    let mut report = StitchReport {
        blocks: blocks.len(),
        ..StitchReport::default()
    };
    for block in blocks {
        block.validate()?;
        if let Some(bad) = block
            .row_ids
            .iter()
            .chain(&block.col_ids)
            .find(|id| id.0 >= n)
        {
            return Err(IngestError::DimensionMismatch { id: bad.0, n });
        }
        for (r, row_id) in block.row_ids.iter().enumerate() {
            for (c, col_id) in block.col_ids.iter().enumerate() {
                let cell = row_id.0 * n + col_id.0;
                let v = block.values[r][c];
                if written[cell] {
                    report.overlapping_writes += 1;
                    if grid[cell].to_bits() != v.to_bits() {
                        report.conflicting_writes += 1;
                    }
                }
                grid[cell] = v;
                written[cell] = true;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                grid[i * n + j] = 0.0;
            } else if !written[i * n + j] {
                return Err(IngestError::CoverageGap(i, j));
            }
        }
    }
    Ok((DistanceMatrix::from_flat(n, grid)?, report))
}

pub fn save_block(block: &MatrixBlock, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let text =
        serde_json::to_string(block).map_err(|e| IngestError::MalformedBlock(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| IngestError::io(path, e))
}

pub fn load_block(path: impl AsRef<Path>) -> Result<MatrixBlock, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let block: MatrixBlock = serde_json::from_str(&text)
        .map_err(|e| IngestError::MalformedBlock(format!("{}: {e}", path.display())))?;
    block.validate()?;
    Ok(block)
}

/// Loads every `*.json` file directly inside `dir`, in file-name order.
pub fn load_blocks_dir(dir: impl AsRef<Path>) -> Result<Vec<MatrixBlock>, IngestError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| IngestError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(load_block).collect()
}
