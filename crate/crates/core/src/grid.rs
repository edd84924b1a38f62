//! Uniform one-dimensional model domains and their quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Closed interval `[0, L]`; both endpoints are sample points.
    Interval,
    /// Circle of circumference `L`; the point `L` is identified with `0`.
    Circle,
}

/// Uniform grid on an interval or a circle.
///
/// Interval nodes are `x_j = j L / (N - 1)` and carry trapezoidal weights;
/// circle nodes are `x_j = j L / N` with uniform weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n_points: usize,
    topology: Topology,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(length: f64, n_points: usize, topology: Topology) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            length,
            n_points,
            topology,
        })
    }

    pub fn interval(length: f64, n_points: usize) -> Result<Self> {
        Self::new(length, n_points, Topology::Interval)
    }

    pub fn circle(length: f64, n_points: usize) -> Result<Self> {
        Self::new(length, n_points, Topology::Circle)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Number of cells between nodes: `N - 1` on intervals, `N` on circles.
    pub fn n_cells(&self) -> usize {
        match self.topology {
            Topology::Interval => self.n_points - 1,
            Topology::Circle => self.n_points,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_cells() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if self.topology == Topology::Interval && j + 1 == self.n_points {
            // exact right endpoint
            return self.length;
        }
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    pub fn weight(&self, j: usize) -> f64 {
        let h = self.spacing();
        match self.topology {
            Topology::Interval if j == 0 || j + 1 == self.n_points => 0.5 * h,
            _ => h,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.weight(j)).collect()
    }

    /// Distance between nodes `i` and `j`; arc distance on circles.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let d = (self.node(i) - self.node(j)).abs();
        match self.topology {
            Topology::Interval => d,
            Topology::Circle => d.min(self.length - d),
        }
    }
}
