use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One lifetime observation. `failed == false` means right censored at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeSample {
    pub time: f64,
    pub failed: bool,
}

impl LifetimeSample {
    pub fn new(time: f64, failed: bool) -> Result<Self> {
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::NonPositiveTime(time));
        }
        Ok(Self { time, failed })
    }

    pub fn failure(time: f64) -> Result<Self> {
        Self::new(time, true)
    }

    pub fn censored(time: f64) -> Result<Self> {
        Self::new(time, false)
    }
}

/// Risk-set and failure counts at each distinct sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingSummary {
    /// Distinct sample times, increasing.
    pub times: Vec<f64>,
    /// `M(t)`: units with recorded time `>= t`.
    pub at_risk: Vec<usize>,
    /// `J(t)`: observed failures exactly at `t`.
    pub failures: Vec<usize>,
}

impl CountingSummary {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `M(t)` at an arbitrary time.
    pub fn at_risk_at(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s < t);
        self.at_risk.get(i).copied().unwrap_or(0)
    }

    /// `J(t)` at an arbitrary time (0 away from sample times).
    pub fn failures_at(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s < t);
        match self.times.get(i) {
            Some(&s) if s == t => self.failures[i],
            _ => 0,
        }
    }
}

/// Builds `M` and `J` at every distinct time in `samples`.
///
/// Censored units tied with failures count in the risk set only.
pub fn counting_summary(samples: &[LifetimeSample]) -> Result<CountingSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    summarize(samples)
}

pub(crate) fn summarize(samples: &[LifetimeSample]) -> Result<CountingSummary> {
    for s in samples {
        if !(s.time.is_finite() && s.time > 0.0) {
            return Err(Error::NonPositiveTime(s.time));
        }
    }
    let mut sorted: Vec<LifetimeSample> = samples.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut summary = CountingSummary {
        times: Vec::new(),
        at_risk: Vec::new(),
        failures: Vec::new(),
    };
    let n = sorted.len();
    let mut i = 0;
    while i < n {
        let t = sorted[i].time;
        let mut j = i;
        let mut failed = 0;
        while j < n && sorted[j].time == t {
            failed += usize::from(sorted[j].failed);
            j += 1;
        }
        summary.times.push(t);
        summary.at_risk.push(n - i);
        summary.failures.push(failed);
        i = j;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(time: f64, failed: bool) -> LifetimeSample {
        LifetimeSample::new(time, failed).unwrap()
    }

    #[test]
    fn three_failures() {
        let c = counting_summary(&[s(1.0, true), s(2.0, true), s(3.0, true)]).unwrap();
        assert_eq!(c.times, vec![1.0, 2.0, 3.0]);
        assert_eq!(c.at_risk, vec![3, 2, 1]);
        assert_eq!(c.failures, vec![1, 1, 1]);
    }

    #[test]
    fn single_censored() {
        let c = counting_summary(&[s(5.0, false)]).unwrap();
        assert_eq!(c.at_risk, vec![1]);
        assert_eq!(c.failures, vec![0]);
    }

    #[test]
    fn ties_between_failures_and_censoring() {
        let c = counting_summary(&[s(2.0, true), s(2.0, false), s(2.0, true)]).unwrap();
        assert_eq!(c.at_risk, vec![3]);
        assert_eq!(c.failures, vec![2]);
        assert_eq!(c.at_risk_at(1.0), 3);
        assert_eq!(c.at_risk_at(2.5), 0);
        assert_eq!(c.failures_at(2.0), 2);
        assert_eq!(c.failures_at(1.0), 0);
    }

    #[test]
    fn rejects_empty_and_nonpositive() {
        assert_eq!(counting_summary(&[]), Err(Error::EmptySample));
        assert!(LifetimeSample::new(0.0, true).is_err());
        let bad = LifetimeSample {
            time: -1.0,
            failed: true,
        };
        assert_eq!(counting_summary(&[bad]), Err(Error::NonPositiveTime(-1.0)));
    }
}
