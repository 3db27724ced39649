//! Block-structured event data and its on-disk CSV form.

use crate::error::HmevError;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// One block (year) of observations: the event count and the positive event
/// magnitudes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockData {
    magnitudes: Vec<f64>,
}

impl BlockData {
    pub fn new(magnitudes: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = magnitudes.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(HmevError::InvalidData(format!(
                "event magnitudes must be finite and positive, got {bad}"
            )));
        }
        Ok(BlockData { magnitudes })
    }

    pub fn empty() -> Self {
        BlockData { magnitudes: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn max(&self) -> Option<f64> {
        self.magnitudes.iter().copied().reduce(f64::max)
    }
}

/// An ordered collection of blocks with a common block size `N_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    blocks: Vec<BlockData>,
    block_size: u32,
}

impl Dataset {
    pub fn new(blocks: Vec<BlockData>, block_size: u32) -> Result<Self> {
        if blocks.is_empty() {
            return Err(HmevError::InvalidData("dataset needs at least one block".into()));
        }
        if block_size == 0 {
            return Err(HmevError::InvalidData("block size must be positive".into()));
        }
        if let Some(block) = blocks.iter().find(|b| b.n() > block_size as usize) {
            return Err(HmevError::InvalidData(format!(
                "block holds {} events but the block size is {}",
                block.n(),
                block_size
            )));
        }
        Ok(Dataset { blocks, block_size })
    }

    pub fn blocks(&self) -> &[BlockData] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn counts(&self) -> Vec<usize> {
        self.blocks.iter().map(BlockData::n).collect()
    }

    pub fn total_events(&self) -> usize {
        self.blocks.iter().map(BlockData::n).sum()
    }

    /// All event magnitudes flattened in block order.
    pub fn all_magnitudes(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.magnitudes().iter().copied()).collect()
    }

    /// Mean of all event magnitudes, if any event exists.
    pub fn mean_magnitude(&self) -> Option<f64> {
        let total = self.total_events();
        if total == 0 {
            None
        } else {
            Some(self.blocks.iter().flat_map(|b| b.magnitudes()).sum::<f64>() / total as f64)
        }
    }

    /// Per-block maxima; empty blocks yield `None`.
    pub fn block_maxima(&self) -> Vec<Option<f64>> {
        self.blocks.iter().map(BlockData::max).collect()
    }

    /// Maxima of the non-empty blocks only.
    pub fn observed_maxima(&self) -> Vec<f64> {
        self.blocks.iter().filter_map(BlockData::max).collect()
    }

    /// Serialize as `block,event,magnitude` rows. Blocks are 1-based; an
    /// empty block is recorded as a single marker row with `event = 0` so
    /// the block structure round-trips through the file.
    pub fn write_csv<W: Write>(&self, mut writer: W, metadata: &[(String, String)]) -> Result<()> {
        for (key, value) in metadata {
            writeln!(writer, "# {key}={value}")?;
        }
        writeln!(writer, "block,event,magnitude")?;
        for (j, block) in self.blocks.iter().enumerate() {
            if block.n() == 0 {
                writeln!(writer, "{},0,0", j + 1)?;
            } else {
                for (i, x) in block.magnitudes().iter().enumerate() {
                    writeln!(writer, "{},{},{}", j + 1, i + 1, x)?;
                }
            }
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path, metadata: &[(String, String)]) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file), metadata)
    }

    /// Read the `block,event,magnitude` form written by [`Dataset::write_csv`].
    pub fn read_csv<R: Read>(reader: R, block_size: u32) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(reader);
        let mut blocks: Vec<BlockData> = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let parse = |field: usize, what: &str| -> Result<f64> {
                row.get(field)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| HmevError::Parse {
                        line: i + 2,
                        message: format!("bad {what} field in dataset csv"),
                    })
            };
            let block = parse(0, "block")? as usize;
            let event = parse(1, "event")? as usize;
            if block == 0 {
                return Err(HmevError::Parse { line: i + 2, message: "block index is 1-based".into() });
            }
            while blocks.len() < block {
                blocks.push(BlockData::empty());
            }
            if event == 0 {
                continue; // marker row for an empty block
            }
            let magnitude = parse(2, "magnitude")?;
            if !(magnitude.is_finite() && magnitude > 0.0) {
                return Err(HmevError::Parse {
                    line: i + 2,
                    message: format!("magnitude must be positive, got {magnitude}"),
                });
            }
            blocks[block - 1].magnitudes.push(magnitude);
        }
        Dataset::new(blocks, block_size)
    }

    pub fn read_csv_path(path: &Path, block_size: u32) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file), block_size)
    }
}
