//! Discrete simulation time grid.

use crate::{Error, Result};

/// A half-open horizon `[start, end)` sampled at a fixed step.
///
/// Sample `i` lies at `start + i * step` for `i` in `0..steps`. Every window,
/// schedule entry, and cover interval produced by this crate is aligned to
/// such a grid, so interval arithmetic happens on indices and stays exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    start: f64,
    step: f64,
    steps: usize,
}

impl TimeGrid {
    /// Grid covering `[start, end)`. The horizon is rounded up to a whole
    /// number of steps.
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(end > start) {
            return Err(Error::InvalidParameter(format!(
                "horizon [{start}, {end}) is empty"
            )));
        }
        let steps = (((end - start) / step) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { start, step, steps })
    }

    pub fn from_steps(start: f64, step: f64, steps: usize) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self { start, step, steps })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of samples in the horizon.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Exclusive end of the horizon.
    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    /// Time of sample `index`; `index == steps` yields the horizon end.
    pub fn time(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.step
    }

    /// Iterate `(index, time)` over all samples.
    pub fn times(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.steps).map(move |i| (i, self.time(i)))
    }

    /// Index of the first sample at or after `t`, clamped to `[0, steps]`.
    /// Times within 1e-9 steps of a sample snap to it.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let x = (t - self.start) / self.step;
        let idx = (x - 1e-9).ceil();
        if idx <= 0.0 {
            0
        } else {
            (idx as usize).min(self.steps)
        }
    }

    /// Sample index nearest to `t`, clamped into `[0, steps)`.
    pub fn nearest_sample(&self, t: f64) -> usize {
        let x = ((t - self.start) / self.step).round();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.steps.saturating_sub(1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_step_horizon() {
        let g = TimeGrid::new(0.0, 100.0, 1.0).unwrap();
        assert_eq!(g.steps(), 100);
        assert_eq!(g.end(), 100.0);
        assert_eq!(g.time(17), 17.0);
    }

    #[test]
    fn fractional_horizon_rounds_up() {
        let g = TimeGrid::new(0.0, 10.5, 1.0).unwrap();
        assert_eq!(g.steps(), 11);
        assert_eq!(g.end(), 11.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TimeGrid::new(0.0, 10.0, 0.0).is_err());
        assert!(TimeGrid::new(5.0, 5.0, 1.0).is_err());
        assert!(TimeGrid::new(5.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::new(0.0, 100.0, 2.0).unwrap();
        assert_eq!(g.index_at_or_after(0.0), 0);
        assert_eq!(g.index_at_or_after(3.0), 2);
        assert_eq!(g.index_at_or_after(4.0), 2);
        assert_eq!(g.index_at_or_after(1e9), g.steps());
        assert_eq!(g.nearest_sample(3.2), 2);
        assert_eq!(g.nearest_sample(-7.0), 0);
        assert_eq!(g.nearest_sample(1e9), g.steps() - 1);
    }
}
