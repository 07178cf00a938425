//! Bootstrap standard errors over (score, label) pairs.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::hypothesis::sample_sd;
use crate::stats::metrics::{Estimate, Metric, MetricsReport};

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Resamples `(score, label)` pairs with replacement `resamples` times and
/// returns the sample standard deviation of `metric` across resamples.
///
/// Resample `b` draws from its own stream, `rng::derived(seed, b)`, so the
/// result does not depend on evaluation order. A resample on which `metric`
/// fails with [`Error::DegenerateClass`] is redrawn; more than
/// `10 · resamples` redraws in total is an [`Error::Instability`].
pub fn bootstrap_se<F>(
    metric: F,
    scores: &[f64],
    labels: &[bool],
    resamples: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&[f64], &[bool]) -> Result<f64>,
{
    if resamples < 2 {
        return Err(Error::Parameter(format!(
            "bootstrap needs at least 2 resamples, got {resamples}"
        )));
    }
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Parameter("cannot bootstrap an empty sample".into()));
    }
    let budget = 10 * resamples;
    let n = scores.len();
    let mut redraws = 0usize;
    let mut values = Vec::with_capacity(resamples);
    let mut s = vec![0.0; n];
    let mut l = vec![false; n];
    for b in 0..resamples {
        let mut stream = rng::derived(seed, b as u64);
        loop {
            for i in 0..n {
                let j = stream.random_range(0..n);
                s[i] = scores[j];
                l[i] = labels[j];
            }
            match metric(&s, &l) {
                Ok(v) => {
                    values.push(v);
                    break;
                }
                Err(Error::DegenerateClass(_)) => {
                    redraws += 1;
                    if redraws > budget {
                        return Err(Error::Instability(format!(
                            "{redraws} degenerate resamples exceed the budget of {budget}"
                        )));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(sample_sd(&values))
}

/// Evaluates every reported metric at `tau` with its bootstrap SE. All
/// metrics share the resample streams. An undefined value leaves both fields
/// empty; a resample on which a ratio is undefined is redrawn, and a metric
/// that exhausts the redraw budget is reported without an SE.
pub fn metrics_report(
    scores: &[f64],
    labels: &[bool],
    tau: f64,
    resamples: usize,
    seed: u64,
) -> Result<MetricsReport> {
    let mut estimates = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let value = metric.evaluate(scores, labels, tau)?;
        let se = match value {
            None => None,
            Some(_) => {
                let f = |s: &[f64], l: &[bool]| {
                    metric.evaluate(s, l, tau)?.ok_or_else(|| {
                        Error::DegenerateClass(format!("{} undefined on resample", metric.name()))
                    })
                };
                match bootstrap_se(f, scores, labels, resamples, seed) {
                    Ok(se) => Some(se),
                    Err(Error::Instability(msg)) => {
                        log::warn!("no standard error for {}: {msg}", metric.name());
                        None
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        estimates.push((metric, Estimate { value, se }));
    }
    Ok(MetricsReport { tau, estimates })
}
