use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous step CDF with jumps on a finite grid of positive times.
///
/// The origin `t = 0` is implicit with value 0. An empty grid is the zero
/// function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCdf {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl DiscreteCdf {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        validate_grid(&grid)?;
        let mut prev = 0.0;
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) || value < prev {
                return Err(Error::NonMonotone { index, value });
            }
            prev = value;
        }
        Ok(Self { grid, values })
    }

    pub fn empty() -> Self {
        Self {
            grid: Vec::new(),
            values: Vec::new(),
        }
    }

    pub(crate) fn from_parts_unchecked(grid: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Value at the largest grid point `<= t`, or 0 before the first point.
    pub fn eval(&self, t: f64) -> f64 {
        match self.index_at(t) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    /// Left limit `G(t-)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let n = self.grid.partition_point(|&g| g < t);
        if n == 0 {
            0.0
        } else {
            self.values[n - 1]
        }
    }

    /// Value just before grid point `i`.
    pub fn left_limit_at(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    /// Index of the largest grid point `<= t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let n = self.grid.partition_point(|&g| g <= t);
        n.checked_sub(1)
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for (index, &time) in grid.iter().enumerate() {
        if !time.is_finite() || time <= prev {
            return Err(Error::InvalidGrid { index, time });
        }
        prev = time;
    }
    Ok(())
}

/// Sorted union of two strictly increasing grids.
pub fn union_grid(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> DiscreteCdf {
        DiscreteCdf::new(vec![1.0, 2.0, 3.0], vec![1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap()
    }

    #[test]
    fn step_lookup_is_right_continuous() {
        let h = h();
        assert_eq!(h.eval(0.5), 0.0);
        assert_eq!(h.eval(1.0), 1.0 / 3.0);
        assert_eq!(h.eval(1.5), 1.0 / 3.0);
        assert_eq!(h.eval(2.0), 2.0 / 3.0);
        assert_eq!(h.eval(10.0), 1.0);
        assert_eq!(h.left_limit(2.0), 1.0 / 3.0);
        assert_eq!(h.left_limit(1.0), 0.0);
        assert_eq!(h.left_limit(2.5), 2.0 / 3.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            DiscreteCdf::new(vec![1.0, 1.0], vec![0.1, 0.2]),
            Err(Error::InvalidGrid { index: 1, .. })
        ));
        assert!(matches!(
            DiscreteCdf::new(vec![0.0], vec![0.1]),
            Err(Error::InvalidGrid { index: 0, .. })
        ));
        assert!(matches!(
            DiscreteCdf::new(vec![1.0, 2.0], vec![0.5, 0.4]),
            Err(Error::NonMonotone { index: 1, .. })
        ));
        assert!(matches!(
            DiscreteCdf::new(vec![1.0], vec![1.5]),
            Err(Error::NonMonotone { .. })
        ));
        assert!(matches!(
            DiscreteCdf::new(vec![1.0], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn union_merges_and_dedups() {
        assert_eq!(union_grid(&[1.0, 3.0], &[2.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(union_grid(&[1.0, 2.0], &[1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(union_grid(&[], &[4.0]), vec![4.0]);
    }
}
