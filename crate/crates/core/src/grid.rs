use serde::{Deserialize, Serialize};

use crate::error::{NeelError, Result};

/// Uniform grid on the truncated line `[-L, L]` with an odd number of nodes,
/// so that `x = 0` is always a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    point_count: usize,
}

impl Grid {
    pub fn new(half_width: f64, point_count: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(NeelError::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if point_count < 3 {
            return Err(NeelError::InvalidGrid(format!(
                "point_count must be at least 3, got {point_count}"
            )));
        }
        if point_count % 2 == 0 {
            return Err(NeelError::InvalidGrid(format!(
                "point_count must be odd so that x = 0 is a node, got {point_count}"
            )));
        }
        Ok(Self {
            half_width,
            point_count,
        })
    }

    /// Smallest odd grid on `[-L, L]` whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(half_width: f64, max_spacing: f64) -> Result<Self> {
        let cells = (2.0 * half_width / max_spacing).ceil() as usize;
        let cells = cells.max(2);
        let cells = if cells % 2 == 1 { cells + 1 } else { cells };
        Self::new(half_width, cells + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.point_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.point_count - 1) as f64
    }

    pub fn center_index(&self) -> usize {
        (self.point_count - 1) / 2
    }

    /// Node coordinate, computed relative to the centre so that the middle
    /// node is exactly zero and the grid is exactly symmetric.
    pub fn x(&self, i: usize) -> f64 {
        let offset = i as f64 - self.center_index() as f64;
        if i == 0 {
            -self.half_width
        } else if i == self.point_count - 1 {
            self.half_width
        } else {
            offset * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.point_count).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weights: `Δ` in the interior, `Δ/2` at the two ends.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.point_count - 1 {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = (x + self.half_width) / self.spacing();
        (t.round().max(0.0) as usize).min(self.point_count - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > -self.half_width && x < self.half_width
    }

    /// Same spacing, different extent. Requires `half_width` to be an even
    /// multiple of the spacing within rounding.
    pub fn resized(&self, half_width: f64) -> Result<Self> {
        let half_cells = (half_width / self.spacing()).round() as usize;
        Self::new(half_cells as f64 * self.spacing(), 2 * half_cells + 1)
    }

    /// Same extent, `Δ` halved.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            point_count: 2 * self.point_count - 1,
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.point_count == other.point_count
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }
}
