//! Time-indexed sequences of fields.

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<f64>,
    states: Vec<T>,
    /// Free-form descriptor of the scheme that produced the samples.
    pub scheme: String,
}

impl<T> Trajectory<T> {
    pub fn new(scheme: impl Into<String>) -> Trajectory<T> {
        Trajectory { times: Vec::new(), states: Vec::new(), scheme: scheme.into() }
    }

    /// Appends a sample; the first time must be 0 and times must increase.
    pub fn push(&mut self, t: f64, state: T) -> Result<()> {
        match self.times.last() {
            None if t != 0.0 => return Err(LabError::InvalidArgument(format!("trajectory must start at t = 0, got {t}"))),
            Some(&last) if !(t > last) => {
                return Err(LabError::InvalidArgument(format!("times must increase: {t} after {last}")));
            }
            _ => {}
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[T] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &T)> {
        self.times.last().map(|&t| (t, self.states.last().unwrap()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Index of the sample closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        (0..self.times.len()).min_by(|&a, &b| (self.times[a] - t).abs().total_cmp(&(self.times[b] - t).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_enforced() {
        let mut tr = Trajectory::new("test");
        assert!(tr.push(0.1, 1).is_err());
        tr.push(0.0, 1).unwrap();
        tr.push(0.5, 2).unwrap();
        assert!(tr.push(0.5, 3).is_err());
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.last(), Some((0.5, &2)));
        assert_eq!(tr.nearest(0.4), Some(1));
    }
}
