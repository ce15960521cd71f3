//! Regular grids of vector-valued samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on a regular grid. `extent` lists sizes from the slowest to the
/// fastest axis (rows before columns for planar images); each node stores
/// `channels` consecutive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    extent: Vec<usize>,
    channels: usize,
    data: Vec<f64>,
    spacing: f64,
}

impl ImageGrid {
    pub fn new(extent: Vec<usize>, channels: usize, data: Vec<f64>) -> Result<Self> {
        if extent.is_empty() || extent.contains(&0) || channels == 0 {
            return Err(Error::InvalidInput("grid extent and channel count must be positive".into()));
        }
        let expected = extent.iter().product::<usize>() * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        Ok(ImageGrid { extent, channels, data, spacing: 1.0 })
    }

    pub fn zeros(extent: Vec<usize>, channels: usize) -> Result<Self> {
        let len = extent.iter().product::<usize>() * channels;
        Self::new(extent, channels, vec![0.0; len])
    }

    /// Planar image from a per-pixel function of `(row, col)`.
    pub fn from_fn_2d<F>(rows: usize, cols: usize, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<f64>,
    {
        let mut data = Vec::with_capacity(rows * cols * channels);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                if v.len() != channels {
                    return Err(Error::DimensionMismatch { expected: channels, found: v.len() });
                }
                data.extend(v);
            }
        }
        Self::new(vec![rows, cols], channels, data)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn ndim(&self) -> usize {
        self.extent.len()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn rows(&self) -> usize {
        self.extent[0]
    }

    pub fn cols(&self) -> usize {
        self.extent[1]
    }

    pub fn num_nodes(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Values of the node with flat index `k`.
    pub fn node(&self, k: usize) -> &[f64] {
        &self.data[k * self.channels..(k + 1) * self.channels]
    }

    pub fn pixel(&self, i: usize, j: usize) -> &[f64] {
        self.node(i * self.extent[1] + j)
    }

    pub fn pixel_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = (i * self.extent[1] + j) * self.channels;
        &mut self.data[k..k + self.channels]
    }

    /// Strides for flat node indexing, fastest axis last.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.extent.len()];
        for a in (0..self.extent.len().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.extent[a + 1];
        }
        s
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn max_abs_diff(&self, other: &ImageGrid) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
