//! Paired t-test and Pearson/Spearman correlation tests, all two-sided.

use crate::error::{Error, Result};
use crate::stats::special::t_sf;

/// Two equal-length vectors of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSamples {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "paired samples have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("paired samples must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub test: TestResult,
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 || v.iter().all(|&x| x == v[0]) {
        return 0.0;
    }
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}

/// Standard error of the mean, `sd / √n`.
pub fn standard_error(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    sample_sd(v) / (v.len() as f64).sqrt()
}

// A spread this small relative to the data magnitude is rounding noise from
// values that were meant to be identical.
fn is_degenerate_spread(spread: f64, v: &[f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    spread == 0.0 || spread <= 16.0 * f64::EPSILON * scale
}

/// Paired-sample t-test on `d = x − y`: `t = mean(d)·√n / sd(d)`, `df = n − 1`.
pub fn paired_t_test(s: &PairedSamples) -> Result<TestResult> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "paired t-test needs n >= 2, got {n}"
        )));
    }
    let d: Vec<f64> = s.x.iter().zip(&s.y).map(|(a, b)| a - b).collect();
    let sd = sample_sd(&d);
    if is_degenerate_spread(sd, &d) {
        return Err(Error::DegenerateVariance(
            "paired differences have zero spread".into(),
        ));
    }
    let statistic = mean(&d) * (n as f64).sqrt() / sd;
    let df = (n - 1) as f64;
    Ok(TestResult {
        statistic,
        df,
        p_value: t_sf(statistic, df)?,
    })
}

fn correlation_test(r: f64, n: usize) -> Result<CorrelationResult> {
    let r = r.clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    if r.abs() == 1.0 {
        return Ok(CorrelationResult {
            coefficient: r,
            test: TestResult {
                statistic: r * f64::INFINITY,
                df,
                p_value: 0.0,
            },
        });
    }
    let statistic = r * (df / (1.0 - r * r)).sqrt();
    Ok(CorrelationResult {
        coefficient: r,
        test: TestResult {
            statistic,
            df,
            p_value: t_sf(statistic, df)?,
        },
    })
}

/// Pearson product-moment correlation with a t-based two-sided p-value.
pub fn pearson(s: &PairedSamples) -> Result<CorrelationResult> {
    let n = s.len();
    if n < 3 {
        return Err(Error::Parameter(format!(
            "correlation test needs n >= 3, got {n}"
        )));
    }
    let mx = mean(&s.x);
    let my = mean(&s.y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in s.x.iter().zip(&s.y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let spread_x = (sxx / (n - 1) as f64).sqrt();
    let spread_y = (syy / (n - 1) as f64).sqrt();
    if is_degenerate_spread(spread_x, &s.x) || is_degenerate_spread(spread_y, &s.y) {
        return Err(Error::DegenerateVariance(
            "correlation input has zero variance".into(),
        ));
    }
    correlation_test(sxy / (sxx * syy).sqrt(), n)
}

/// Average ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // Positions i..=j hold ranks i+1..=j+1.
        let rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(s: &PairedSamples) -> Result<CorrelationResult> {
    let ranked = PairedSamples::new(average_ranks(&s.x), average_ranks(&s.y))?;
    pearson(&ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(x: &[f64], y: &[f64]) -> PairedSamples {
        PairedSamples::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn paired_t_worked_example() {
        let r = paired_t_test(&pairs(&[2.0, 4.0, 6.0], &[1.0, 3.0, 4.0])).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert_eq!(r.df, 2.0);
        assert!((r.p_value - (1.0 - 4.0 / 18f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn paired_t_constant_shift_is_degenerate() {
        let y = [0.1, 0.7, 1.3, 2.9];
        let x: Vec<f64> = y.iter().map(|v| v + 0.2).collect();
        assert!(matches!(
            paired_t_test(&pairs(&x, &y)),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn paired_t_antisymmetric() {
        let s = pairs(&[0.3, 0.9, 0.4, 0.8], &[0.1, 0.2, 0.5, 0.3]);
        let a = paired_t_test(&s).unwrap();
        let b = paired_t_test(&s.swapped()).unwrap();
        assert_eq!(a.statistic, -b.statistic);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn pearson_examples() {
        let r = pearson(&pairs(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(r.coefficient, 1.0);
        assert_eq!(r.test.p_value, 0.0);
        let r = pearson(&pairs(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0])).unwrap();
        assert!((r.coefficient - 0.5).abs() < 1e-12);
        assert!((r.test.p_value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn pearson_zero_variance() {
        assert!(matches!(
            pearson(&pairs(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn spearman_examples() {
        let x = [0.1, 0.5, 0.7, 2.0, 3.5];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp() * 3.0).collect();
        assert_eq!(spearman(&pairs(&x, &y)).unwrap().coefficient, 1.0);
        let r = spearman(&pairs(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0])).unwrap();
        assert!((r.coefficient - 0.5).abs() < 1e-12);
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn spearman_all_tied() {
        assert!(matches!(
            spearman(&pairs(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0])),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(PairedSamples::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PairedSamples::new(vec![f64::NAN], vec![1.0]).is_err());
    }
}
