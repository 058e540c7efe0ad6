use crate::error::{Error, Result};
use std::io::Write;

/// Which one-sided limit a step function takes at its jump points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    /// f(t) = value of the last jump at or before t.
    Right,
    /// f(t) = value of the last jump strictly before t.
    Left,
}

/// Piecewise-constant function given by its jump locations and the value
/// taken after each jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    values: Vec<f64>,
    initial_value: f64,
    continuity: Continuity,
}

impl StepFunction {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>, initial_value: f64, continuity: Continuity) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::InvalidParameter("jump_times and values differ in length".into()));
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("jump times must be strictly increasing".into()));
        }
        Ok(Self { jump_times, values, initial_value, continuity })
    }

    pub fn right_continuous(jump_times: Vec<f64>, values: Vec<f64>, initial_value: f64) -> Result<Self> {
        Self::new(jump_times, values, initial_value, Continuity::Right)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.continuity {
            Continuity::Right => self.right_limit(t),
            Continuity::Left => self.left_limit(t),
        }
    }

    /// f(t+): value of the last jump ≤ t.
    pub fn right_limit(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            self.initial_value
        } else {
            self.values[k - 1]
        }
    }

    /// f(t−): value of the last jump < t.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s < t);
        if k == 0 {
            self.initial_value
        } else {
            self.values[k - 1]
        }
    }

    /// Size of each jump, value after minus value before.
    pub fn jumps(&self) -> Vec<f64> {
        let mut prev = self.initial_value;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial_value)
    }

    /// Writes `t,value` CSV, one row per jump.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (t, v) in self.jump_times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_evaluation() {
        let f = StepFunction::right_continuous(vec![1.0, 2.0], vec![0.5, 1.0], 0.0).unwrap();
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.left_limit(1.0), 0.0);
        assert_eq!(f.eval(1.5), 0.5);
        assert_eq!(f.eval(7.0), 1.0);
        let g = StepFunction::new(vec![1.0, 2.0], vec![0.5, 1.0], 0.0, Continuity::Left).unwrap();
        assert_eq!(g.eval(1.0), 0.0);
        assert_eq!(g.eval(1.0 + 1e-12), 0.5);
        assert_eq!(f.jumps(), vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_unsorted_jumps() {
        assert!(StepFunction::right_continuous(vec![1.0, 1.0], vec![0.1, 0.2], 0.0).is_err());
        assert!(StepFunction::right_continuous(vec![2.0, 1.0], vec![0.1, 0.2], 0.0).is_err());
    }
}
