use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::node::MAX_DEPTH;

/// A square `L x L` real signal with `L = 2^d_max`, stored in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal2D {
    side: usize,
    data: Vec<f64>,
}

impl Signal2D {
    pub fn new(side: usize, data: Vec<f64>) -> Result<Self> {
        side_depth(side)?;
        if data.len() != side * side {
            return Err(Error::domain(format!(
                "expected {} values for a {side}x{side} signal, got {}",
                side * side,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite value at row {}, column {}",
                k / side,
                k % side
            )));
        }
        Ok(Signal2D { side, data })
    }

    pub fn zeros(d_max: u32) -> Self {
        Self::constant(d_max, 0.0)
    }

    pub fn constant(d_max: u32, value: f64) -> Self {
        let side = 1usize << d_max;
        Signal2D {
            side,
            data: vec![value; side * side],
        }
    }

    pub fn from_fn(d_max: u32, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let side = 1usize << d_max;
        let mut data = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                data.push(f(r, c));
            }
        }
        Self::new(side, data)
    }

    pub(crate) fn from_raw(side: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), side * side);
        Signal2D { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn d_max(&self) -> u32 {
        self.side.trailing_zeros()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.side + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn scaled(&self, k: f64) -> Signal2D {
        Signal2D::from_raw(self.side, self.data.iter().map(|v| v * k).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Signal2D) -> f64 {
        assert_eq!(self.side, other.side, "signal sides differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Per-pixel mean squared difference.
    pub fn mse(&self, other: &Signal2D) -> f64 {
        assert_eq!(self.side, other.side, "signal sides differ");
        let n = self.data.len() as f64;
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n
    }
}

impl Add for &Signal2D {
    type Output = Signal2D;
    fn add(self, rhs: &Signal2D) -> Signal2D {
        assert_eq!(self.side, rhs.side, "signal sides differ");
        Signal2D::from_raw(
            self.side,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &Signal2D {
    type Output = Signal2D;
    fn sub(self, rhs: &Signal2D) -> Signal2D {
        assert_eq!(self.side, rhs.side, "signal sides differ");
        Signal2D::from_raw(
            self.side,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

/// `log2(side)` when `side` is a supported power of two.
pub fn side_depth(side: usize) -> Result<u32> {
    if side == 0 || !side.is_power_of_two() {
        return Err(Error::domain(format!(
            "side must be a power of two, got {side}"
        )));
    }
    let d = side.trailing_zeros();
    if d > MAX_DEPTH {
        return Err(Error::domain(format!(
            "side {side} exceeds the supported maximum 2^{MAX_DEPTH}"
        )));
    }
    Ok(d)
}
