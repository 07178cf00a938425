//! Paired t-test, correlations, ranking metrics, thresholds and bootstrap
//! standard errors.
//!
//! cargo run --release --example statistics

use camalign::stats::{
    auprc, auroc, confusion_metrics, metrics_report, paired_t_test, pearson, select_threshold,
    spearman, Metric, PairedSamples, ThresholdCriterion,
};

fn main() -> camalign::Result<()> {
    let activation = vec![0.62, 0.48, 0.71, 0.55, 0.80, 0.43, 0.67];
    let structure = vec![0.21, 0.25, 0.19, 0.30, 0.22, 0.27, 0.24];
    let pairs = PairedSamples::new(activation, structure)?;
    let t = paired_t_test(&pairs)?;
    println!("paired t {:.3} df {} p {:.2e}", t.statistic, t.df, t.p_value);

    let x = PairedSamples::new(vec![0.91, 0.85, 0.97, 0.78, 0.88], vec![0.52, 0.47, 0.63, 0.41, 0.44])?;
    let (p, s) = (pearson(&x)?, spearman(&x)?);
    println!("pearson {:.3} (p {:.3})  spearman {:.3} (p {:.3})", p.coefficient, p.test.p_value, s.coefficient, s.test.p_value);

    let scores = [0.1, 0.35, 0.4, 0.8, 0.65, 0.2, 0.9, 0.55, 0.3, 0.7];
    let labels = [false, false, true, true, true, false, true, false, false, true];
    println!("auroc {:.3} auprc {:.3}", auroc(&scores, &labels)?, auprc(&scores, &labels)?);
    let th = select_threshold(&scores, &labels, ThresholdCriterion::Youden)?;
    let c = confusion_metrics(&scores, &labels, th.tau)?;
    println!("youden tau {} J {:.3} -> {:?}", th.tau, th.criterion_value, c.counts);

    let report = metrics_report(&scores, &labels, th.tau, 1000, 42)?;
    for m in Metric::ALL {
        let e = report.get(m);
        println!(
            "{:<12} {:>6} ± {}",
            m.name(),
            e.value.map_or("-".into(), |v| format!("{v:.3}")),
            e.se.map_or("-".into(), |v| format!("{v:.3}"))
        );
    }
    Ok(())
}
