use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid: `n_points` samples starting at `x_min`, the right
/// endpoint `x_max` excluded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<RawGrid> for Grid1D {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid1D::new(raw.x_min, raw.x_max, raw.n_points)
    }
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min = {x_min} must be smaller than x_max = {x_max}"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid on `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Length of the periodic cell, `x_max - x_min`.
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Largest |x| over the grid.
    pub fn max_abs(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs())
    }

    /// Same spacing, extended by whole cells on each side.
    pub fn extended(&self, left_cells: usize, right_cells: usize) -> Grid1D {
        let h = self.spacing();
        Grid1D {
            x_min: self.x_min - left_cells as f64 * h,
            x_max: self.x_max + right_cells as f64 * h,
            n_points: self.n_points + left_cells + right_cells,
        }
    }

    /// Grid with the points `factor * x_i`.
    pub fn scaled(&self, factor: f64) -> Result<Grid1D> {
        Grid1D::new(self.x_min * factor, self.x_max * factor, self.n_points)
    }

    /// `Some(m)` when `x_min = m * spacing` for an integer `m`, i.e. the
    /// lattice passes through the origin.
    pub fn origin_offset(&self) -> Option<i64> {
        let r = self.x_min / self.spacing();
        let m = r.round();
        ((r - m).abs() <= 1e-9 * r.abs().max(1.0)).then_some(m as i64)
    }

    /// Angular wavenumbers of the discrete Fourier modes, in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|m| {
                let signed = if m < (n + 1) / 2 { m } else { m - n };
                signed as f64 * dk
            })
            .collect()
    }

    /// Discrete L2 norm `sqrt(h * sum |v|^2)`.
    pub fn l2_norm(&self, values: &[num_complex::Complex64]) -> f64 {
        (self.spacing() * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete L2 distance between two sampled functions.
    pub fn l2_distance(
        &self,
        a: &[num_complex::Complex64],
        b: &[num_complex::Complex64],
    ) -> f64 {
        (self.spacing()
            * a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>())
        .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_exclusive() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5]);
        assert_eq!(g.origin_offset(), Some(-2));
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Grid1D::new(1.0, 1.0, 8).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 8).is_err());
    }

    #[test]
    fn extension_keeps_lattice() {
        let g = Grid1D::new(-8.0, 4.0, 12).unwrap();
        let e = g.extended(3, 2);
        assert_eq!(e.n_points(), 17);
        assert!((e.spacing() - g.spacing()).abs() < 1e-15);
        assert!((e.point(3) - g.point(0)).abs() < 1e-12);
    }

    #[test]
    fn wavenumbers_fft_order() {
        let g = Grid1D::new(0.0, 2.0 * std::f64::consts::PI, 4).unwrap();
        assert_eq!(g.wavenumbers(), vec![0.0, 1.0, -2.0, -1.0]);
    }

    #[test]
    fn off_origin_lattice() {
        let g = Grid1D::new(-8.0, 4.0, 4096).unwrap();
        assert_eq!(g.origin_offset(), None);
    }
}
