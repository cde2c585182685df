use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};

/// A function on `[0,1)` that is constant on the cells of the level-`grid`
/// dyadic partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    grid_level: u32,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(grid_level: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << grid_level {
            return Err(Error::domain(format!(
                "level-{grid_level} grid needs {} values, got {}",
                1usize << grid_level,
                values.len()
            )));
        }
        Ok(Self { grid_level, values })
    }

    pub fn constant(grid_level: u32, value: f64) -> Self {
        Self {
            grid_level,
            values: vec![value; 1 << grid_level],
        }
    }

    pub fn grid_level(&self) -> u32 {
        self.grid_level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.grid_level as f64)).exp2()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_width()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// Values on the level-`level` grid; each cell value is repeated.
    pub fn refined(&self, level: u32) -> Result<Self> {
        if level < self.grid_level {
            return Err(Error::domain(format!(
                "cannot refine a level-{} grid to level {level}",
                self.grid_level
            )));
        }
        let rep = 1usize << (level - self.grid_level);
        let values = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat(*v).take(rep))
            .collect();
        Ok(Self {
            grid_level: level,
            values,
        })
    }

    /// The Haar function `h_I` sampled on the level-`grid` partition.
    pub fn haar(interval: &DyadicInterval, grid: u32) -> Result<Self> {
        if grid < interval.level() + 1 {
            return Err(Error::domain(format!(
                "grid level {grid} is too coarse for h_{interval}; need ≥ {}",
                interval.level() + 1
            )));
        }
        let mut values = vec![0.0; 1 << grid];
        let range = interval.cell_range(grid);
        let half = range.len() / 2;
        for (k, cell) in range.enumerate() {
            values[cell] = if k < half { 1.0 } else { -1.0 };
        }
        Ok(Self {
            grid_level: grid,
            values,
        })
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid_level: self.grid_level,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Brings two step functions onto a common grid.
    pub fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let level = a.grid_level.max(b.grid_level);
        (a.refined(level).unwrap(), b.refined(level).unwrap())
    }

    /// `(∫ g^p)^{1/p}` for a nonnegative step function.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain(format!(
                "L^p exponent must be positive, got {p}"
            )));
        }
        let w = self.cell_width();
        let norm = if p == 1.0 {
            self.values.iter().map(|v| v.abs()).sum::<f64>() * w
        } else if p == 2.0 {
            (self.values.iter().map(|v| v * v).sum::<f64>() * w).sqrt()
        } else {
            (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
        };
        Ok(norm)
    }
}

/// `(∫ g^p)^{1/p}` of a nonnegative step function.
pub fn lp_norm(g: &StepFunction, p: f64) -> Result<f64> {
    g.lp_norm(p)
}
