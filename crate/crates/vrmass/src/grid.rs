//! Log-spaced radial grids.

use crate::error::{Result, VrError};
use serde::{Deserialize, Serialize};

/// A strictly increasing, logarithmically spaced sequence of radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points_per_decade: usize,
    nodes: Vec<f64>,
}

impl LogGrid {
    pub fn new(r_min: f64, r_max: f64, points_per_decade: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(VrError::EmptyGrid(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if points_per_decade == 0 {
            return Err(VrError::EmptyGrid("points_per_decade = 0".into()));
        }
        let decades = (r_max / r_min).log10();
        let count = (decades * points_per_decade as f64).ceil() as usize + 1;
        let x0 = r_min.ln();
        let x1 = r_max.ln();
        let dx = (x1 - x0) / (count - 1) as f64;
        let nodes = (0..count).map(|i| (x0 + i as f64 * dx).exp()).collect();
        Ok(LogGrid { r_min, r_max, points_per_decade, nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes restricted to a window `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.nodes.iter().copied().filter(|&r| r >= lo && r <= hi).collect()
    }
}
