use super::quad::integrate;
use crate::error::{Error, Result};

/// Shapes of the three independent betas whose product density is known exactly.
pub const THREE_BETA_SHAPES: [(f64, f64); 3] = [(9.0, 3.0), (8.0, 3.0), (4.0, 2.0)];

/// Density of `X1 X2 X3` with `Xi ~ Beta(THREE_BETA_SHAPES[i])`.
pub fn exact_three_beta_product_pdf(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Config(format!(
            "density argument {y} outside [0, 1]"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let l = y.ln();
    let y3 = y * y * y;
    let y4 = y3 * y;
    let y7 = y4 * y3;
    let y8 = y7 * y;
    let y9 = y8 * y;
    let y10 = y9 * y;
    Ok(
        3960.0 / 7.0 * y3 - 1980.0 * y4 + 99000.0 * y7 + (374220.0 + 356400.0 * l) * y8
            - (443520.0 - 237600.0 * l) * y9
            - 198000.0 / 7.0 * y10,
    )
}

/// CDF of the exact product law by adaptive quadrature of the density.
pub fn exact_three_beta_product_cdf(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Config(format!("cdf argument {y} outside [0, 1]")));
    }
    let pdf = |x: f64| exact_three_beta_product_pdf(x).unwrap_or(0.0);
    Ok(integrate(pdf, 0.0, y, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_normalizes_and_has_product_mean() {
        let pdf = |y: f64| exact_three_beta_product_pdf(y).unwrap();
        let total = integrate(pdf, 0.0, 1.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let mean = integrate(|y| y * pdf(y), 0.0, 1.0, 1e-12);
        let expect: f64 = THREE_BETA_SHAPES.iter().map(|(a, b)| a / (a + b)).product();
        assert!((expect - 4.0 / 11.0).abs() < 1e-15);
        assert!((mean - 4.0 / 11.0).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn boundary_and_domain() {
        assert_eq!(exact_three_beta_product_pdf(0.0).unwrap(), 0.0);
        assert!(exact_three_beta_product_pdf(1e-9).unwrap().abs() < 1e-20);
        assert!(exact_three_beta_product_pdf(1.5).is_err());
        assert!(exact_three_beta_product_pdf(-0.1).is_err());
        assert!((exact_three_beta_product_cdf(1.0).unwrap() - 1.0).abs() < 1e-9);
    }
}
