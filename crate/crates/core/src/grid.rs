use crate::error::{Error, Result};

/// Uniform sampling `x_k = x_min + k h`, `k = 0..n`, of a truncated real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    h: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, h: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !h.is_finite() {
            return Err(Error::InvalidGrid("non-finite parameters".into()));
        }
        if h <= 0.0 {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        Ok(Self { x_min, h, n })
    }

    /// Grid with `n` samples covering `[x_min, x_max]` including both endpoints.
    pub fn from_bounds(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidGrid(format!("x_min {x_min} must be below x_max {x_max}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        Self::new(x_min, (x_max - x_min) / (n - 1) as f64, n)
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.h
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.x(k))
    }

    /// Mirror image `x -> -x` of node `k` is node `n-1-k` when the grid is centred at zero.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max()).abs() <= 1e-12 * self.x_max().abs().max(1.0)
    }

    /// Cell index `i` and local coordinate `t in [0,1]` of `x` (clamped into the grid).
    #[inline]
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.x_min) / self.h;
        let i = (s.floor().max(0.0) as usize).min(self.n - 2);
        let t = (x - self.x(i)) / self.h;
        (i, t)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(0.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, -1.0, 10).is_err());
        assert!(Grid::new(0.0, 0.1, 1).is_err());
        assert!(Grid::new(f64::NAN, 0.1, 10).is_err());
        assert!(Grid::from_bounds(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn endpoints() {
        let g = Grid::from_bounds(-20.0, 20.0, 4001).unwrap();
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert!((g.x_max() - 20.0).abs() < 1e-12);
        assert!(g.is_symmetric());
        let (i, t) = g.locate(20.0);
        assert_eq!(i, 3999);
        assert!((t - 1.0).abs() < 1e-9);
    }
}
