use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::error::{Error, Result};

/// Shape parameters of a beta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaShape {
    pub a: f64,
    pub b: f64,
}

impl BetaShape {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidShape { index: 0, a, b });
        }
        Ok(Self { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn second_moment(&self) -> f64 {
        let n = self.a + self.b;
        self.a * (self.a + 1.0) / (n * (n + 1.0))
    }

    pub fn variance(&self) -> f64 {
        let n = self.a + self.b;
        self.a * self.b / (n * n * (n + 1.0))
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        inv_beta_reg(self.a, self.b, p)
    }
}

/// Beta distribution with mean `m` and second moment `s`.
pub fn beta_match(m: f64, s: f64) -> Result<BetaShape> {
    if !(m > 0.0 && m < 1.0) || !s.is_finite() {
        return Err(Error::InconsistentMoments { mean: m, second: s });
    }
    let v = s - m * m;
    if v <= 0.0 {
        return Err(Error::ZeroVariance { mean: m, second: s });
    }
    let bound = m * (1.0 - m);
    if v >= bound {
        return Err(Error::InconsistentMoments { mean: m, second: s });
    }
    let k = bound / v - 1.0;
    Ok(BetaShape {
        a: m * k,
        b: (1.0 - m) * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_known_shapes() {
        let s = beta_match(1.0 / 3.0, 1.0 / 6.0).unwrap();
        assert!((s.a - 1.0).abs() < 1e-12 && (s.b - 2.0).abs() < 1e-12);
        let s = beta_match(0.5, 0.3).unwrap();
        assert!((s.a - 2.0).abs() < 1e-12 && (s.b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_moments() {
        assert!(matches!(
            beta_match(0.5, 0.25),
            Err(Error::ZeroVariance { .. })
        ));
        assert!(matches!(
            beta_match(0.5, 0.5),
            Err(Error::InconsistentMoments { .. })
        ));
        assert!(matches!(
            beta_match(0.0, 0.0),
            Err(Error::InconsistentMoments { .. })
        ));
    }

    #[test]
    fn beta_1_2_quantiles_agree_with_closed_form() {
        // CDF of Beta(1, 2) is 1 - (1 - x)^2.
        let shape = BetaShape::new(1.0, 2.0).unwrap();
        for p in [0.025f64, 0.1, 0.5, 0.9, 0.975] {
            let exact = 1.0 - (1.0 - p).sqrt();
            assert!((shape.quantile(p) - exact).abs() < 1e-12, "p = {p}");
        }
    }

    proptest! {
        #[test]
        fn match_then_moments_roundtrips(m in 0.01f64..0.99, frac in 0.01f64..0.99) {
            let s = m * m + frac * m * (1.0 - m);
            let shape = beta_match(m, s).unwrap();
            prop_assert!((shape.mean() - m).abs() < 1e-12);
            prop_assert!((shape.second_moment() - s).abs() < 1e-12);
        }
    }
}
