//! Kolmogorov–Smirnov distances.

use crate::error::{Error, Result};

/// Standard deviation of the limiting Kolmogorov distribution,
/// `sqrt(π²/12 - (π/2) ln² 2)`. Divided by `√N` it gives the null-scale
/// spread of a one-sample KS distance.
pub const KOLMOGOROV_SD: f64 = 0.260_332_871_462_412_7;

/// `sup_x |F_N(x) - F(x)|` over the sorted sample points.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("KS statistic needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    Ok(d)
}

/// Two-sample KS distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("two-sample KS needs non-empty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use crate::special::standard_normal_cdf;

    #[test]
    fn single_point_cases() {
        assert_eq!(ks_statistic(&[0.0], standard_normal_cdf).unwrap(), 0.5);
        assert_eq!(ks_statistic(&[f64::NEG_INFINITY], standard_normal_cdf).unwrap(), 1.0);
        assert!(ks_statistic(&[], standard_normal_cdf).is_err());
    }

    #[test]
    fn null_samples_stay_below_kolmogorov_quantile() {
        let x = DistributionSpec::normal(0.0, 1.0).unwrap().sample(2000, 5).unwrap();
        let d = ks_statistic(&x, standard_normal_cdf).unwrap();
        assert!(d <= 1.63 / (2000f64).sqrt(), "{d}");
    }

    #[test]
    fn ties_are_handled() {
        // Half the mass at -1 and half at 1 against a continuous CDF.
        let x = [-1.0, -1.0, 1.0, 1.0];
        let d = ks_statistic(&x, standard_normal_cdf).unwrap();
        let expect = (0.5 - standard_normal_cdf(-1.0)).max(standard_normal_cdf(1.0) - 0.5).max(1.0 - standard_normal_cdf(1.0));
        assert!((d - expect).abs() < 1e-15);
    }

    #[test]
    fn two_sample() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]).unwrap(), 0.5);
    }
}
