use crate::bsp::{DiscreteCdf, LifetimeSample};
use crate::error::{Error, Result};

/// Product-limit estimate of the CDF at each distinct failure time.
///
/// Censored units tied with a failure time stay in that time's risk set.
pub fn kaplan_meier(samples: &[LifetimeSample]) -> Result<DiscreteCdf> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = samples
        .iter()
        .find(|s| !(s.time > 0.0 && s.time.is_finite()))
    {
        return Err(Error::NonPositiveTime(bad.time));
    }
    let mut times: Vec<f64> = samples
        .iter()
        .filter(|s| s.failed)
        .map(|s| s.time)
        .collect();
    if times.is_empty() {
        return Err(Error::NoFailures);
    }
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut survival = 1.0;
    let mut values = Vec::with_capacity(times.len());
    for &t in &times {
        let at_risk = samples.iter().filter(|s| s.time >= t).count() as f64;
        let deaths = samples.iter().filter(|s| s.failed && s.time == t).count() as f64;
        survival *= 1.0 - deaths / at_risk;
        values.push(1.0 - survival);
    }
    DiscreteCdf::new(times, values)
}
