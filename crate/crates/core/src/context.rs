//! Execution contexts: fully explored grids replayed as simulated worlds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FleetError, Result};
use crate::grid::{GridDims, StateId};

/// Per-cell raw sensor channels plus hidden ground truth.
///
/// Ground truth is only read by evaluation code, never by agents.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionContext {
    pub context_id: String,
    dims: GridDims,
    channels: usize,
    cells: Vec<f64>,
    ground_truth: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ContextFile {
    context_id: String,
    width: usize,
    height: usize,
    channels: usize,
    cells: Vec<Vec<f64>>,
    ground_truth: Vec<Vec<f64>>,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> FleetError {
    FleetError::Schema { field: field.into(), message: message.into() }
}

impl ExecutionContext {
    /// `cells` is row-major with `channels` values per cell.
    pub fn new(
        context_id: impl Into<String>,
        dims: GridDims,
        channels: usize,
        cells: Vec<f64>,
        ground_truth: Vec<f64>,
    ) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 {
            return Err(schema("width/height", "grid dimensions must be at least 1"));
        }
        let n = dims.n_states();
        if cells.len() != n * channels {
            return Err(schema("cells", format!("expected {} values, got {}", n * channels, cells.len())));
        }
        if ground_truth.len() != n {
            return Err(schema("ground_truth", format!("expected {n} values, got {}", ground_truth.len())));
        }
        if let Some(i) = cells.iter().position(|v| !v.is_finite()) {
            let s = dims.state(i / channels.max(1));
            return Err(schema(format!("cells[{},{}]", s.row, s.col), "non-finite channel value"));
        }
        if let Some(i) = ground_truth.iter().position(|v| !v.is_finite()) {
            let s = dims.state(i);
            return Err(schema(format!("ground_truth[{},{}]", s.row, s.col), "non-finite value"));
        }
        Ok(Self { context_id: context_id.into(), dims, channels, cells, ground_truth })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Raw sensor record at `s`.
    pub fn sense(&self, s: StateId) -> &[f64] {
        let i = self.dims.index(s) * self.channels;
        &self.cells[i..i + self.channels]
    }

    pub fn truth(&self, s: StateId) -> f64 {
        self.ground_truth[self.dims.index(s)]
    }

    pub fn ground_truth(&self) -> &[f64] {
        &self.ground_truth
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ContextFile {
            context_id: self.context_id.clone(),
            width: self.dims.width,
            height: self.dims.height,
            channels: self.channels,
            cells: self.cells.chunks(self.channels.max(1)).map(<[f64]>::to_vec).collect(),
            ground_truth: self.ground_truth.chunks(self.dims.width).map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string(&file).map_err(|e| FleetError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ContextFile = serde_json::from_str(text).map_err(|e| FleetError::Parse(e.to_string()))?;
        let dims = GridDims::new(file.width, file.height);
        if file.width == 0 || file.height == 0 {
            return Err(schema("width/height", "grid dimensions must be at least 1"));
        }
        if file.cells.len() != dims.n_states() {
            return Err(schema("cells", format!("expected {} cells, got {}", dims.n_states(), file.cells.len())));
        }
        for (i, cell) in file.cells.iter().enumerate() {
            if cell.len() != file.channels {
                let s = dims.state(i);
                return Err(schema(
                    format!("cells[{},{}]", s.row, s.col),
                    format!("expected {} channels, got {}", file.channels, cell.len()),
                ));
            }
        }
        if file.ground_truth.len() != file.height {
            return Err(schema("ground_truth", format!("expected {} rows", file.height)));
        }
        if let Some(r) = file.ground_truth.iter().position(|row| row.len() != file.width) {
            return Err(schema(format!("ground_truth[{r}]"), format!("expected {} columns", file.width)));
        }
        Self::new(
            file.context_id,
            dims,
            file.channels,
            file.cells.into_iter().flatten().collect(),
            file.ground_truth.into_iter().flatten().collect(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

pub fn load_context(path: impl AsRef<Path>) -> Result<ExecutionContext> {
    ExecutionContext::from_json(&std::fs::read_to_string(path)?)
}
