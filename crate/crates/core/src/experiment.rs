//! Cross-validated experiment: per scenario, obtain a model, pick τ on the
//! validation subset, score the test subset, explain it with each requested
//! CAM method and measure focus/anatomy overlap. Results are pooled into
//! explanation and correlation tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::cam::{self, CamInputs, CamMethod, LayerActivations, LayerGradients, SaliencyMap, ScoreSource};
use crate::dataset::{Dataset, SampleRecord};
use crate::error::{Error, Result, ResultExt};
use crate::focus::{top_fraction_region, AnatomyMask, FocusRegion, RatioRecord, DEFAULT_FRACTION};
use crate::minicnn::{self, Example, MiniCnnModel, TrainConfig, TrainOutcome};
use crate::rng;
use crate::splits::{external_split, make_splits, SplitScenario};
use crate::stats::{
    mean, metrics_report, paired_t_test, pearson, select_threshold, spearman, standard_error,
    CorrelationResult, Metric, MetricsReport, PairedSamples, TestResult, ThresholdCriterion,
    DEFAULT_RESAMPLES,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Train the built-in CNN per scenario and query it directly.
    #[default]
    Mini,
    /// Use scores and layer tensors exported alongside each sample.
    Bundle,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mini" => Ok(Mode::Mini),
            "bundle" => Ok(Mode::Bundle),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Mini => "mini",
            Mode::Bundle => "bundle",
        })
    }
}

/// Class whose evidence the saliency maps explain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetClass {
    #[default]
    Predicted,
    Label,
}

impl FromStr for TargetClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predicted" => Ok(TargetClass::Predicted),
            "label" => Ok(TargetClass::Label),
            other => Err(Error::Config(format!("unknown target class policy '{other}'"))),
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetClass::Predicted => "predicted",
            TargetClass::Label => "label",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub methods: Vec<CamMethod>,
    pub fraction: f64,
    pub target_class: TargetClass,
    pub bootstrap: usize,
    pub criterion: ThresholdCriterion,
    pub seed: u64,
    /// Mini mode only. Each scenario's seed is derived from `seed`.
    pub train: TrainConfig,
    /// Mini mode: per-scenario models to use instead of training.
    pub models: Option<Vec<MiniCnnModel>>,
    /// Saliency maps retained from scenario 1 for rendering.
    pub keep_maps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Mini,
            methods: CamMethod::ALL.to_vec(),
            fraction: DEFAULT_FRACTION,
            target_class: TargetClass::Predicted,
            bootstrap: DEFAULT_RESAMPLES,
            criterion: ThresholdCriterion::Youden,
            seed: 0,
            train: TrainConfig::default(),
            models: None,
            keep_maps: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no CAM method selected".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config(format!(
                "focus fraction {} outside (0, 1]",
                self.fraction
            )));
        }
        if self.bootstrap < 2 {
            return Err(Error::Config(format!(
                "bootstrap needs at least 2 resamples, got {}",
                self.bootstrap
            )));
        }
        match self.mode {
            Mode::Mini => {
                self.train.validate()?;
                if let Some(m) = &self.models {
                    if m.len() != 6 {
                        return Err(Error::Config(format!(
                            "expected 6 scenario models, got {}",
                            m.len()
                        )));
                    }
                }
            }
            Mode::Bundle => {
                if self.models.is_some() {
                    return Err(Error::Config(
                        "bundle mode cannot be combined with mini-CNN models".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Which data a classification row was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Internal,
    External,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evaluation::Internal => "internal",
            Evaluation::External => "external",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub evaluation: Evaluation,
    /// 1-based scenario index; the model's scenario for external rows.
    pub scenario: usize,
    pub test_size: usize,
    pub metrics: MetricsReport,
}

/// Overlap ratios for one (scenario, sample, method, anatomy).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRatio {
    pub scenario: usize,
    pub sample_id: String,
    pub label: bool,
    /// Probability of class 1.
    pub score: f64,
    pub target_class: usize,
    pub method: CamMethod,
    pub anatomy: String,
    pub record: RatioRecord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    fn of(v: &[f64]) -> Self {
        Self {
            mean: mean(v),
            se: standard_error(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationRow {
    pub method: CamMethod,
    pub anatomy: String,
    pub n: usize,
    pub activation: MeanSe,
    pub structure: MeanSe,
    pub difference: MeanSe,
    /// Absent when fewer than 2 pairs or the differences have no spread.
    pub test: Option<TestResult>,
}

/// One aggregate point relating a scenario's test AUROC to the mean
/// activation ratio of one method on one anatomy.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPoint {
    pub scenario: String,
    pub model: String,
    pub method: CamMethod,
    pub anatomy: String,
    pub auroc: f64,
    pub mean_activation_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub anatomy: String,
    /// `None` pools every method.
    pub method: Option<CamMethod>,
    pub n: usize,
    pub pearson: Option<CorrelationResult>,
    pub spearman: Option<CorrelationResult>,
}

/// A saliency map kept for rendering.
#[derive(Debug, Clone)]
pub struct RetainedMap {
    pub scenario: usize,
    pub sample_id: String,
    pub method: CamMethod,
    pub image: Tensor,
    pub saliency: SaliencyMap,
    pub region: FocusRegion,
    pub anatomy: Option<(String, AnatomyMask)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub model: String,
    pub scenarios: Vec<ScenarioOutcome>,
    pub external: Vec<ScenarioOutcome>,
    pub ratios: Vec<SampleRatio>,
    pub explanation: Vec<ExplanationRow>,
    pub points: Vec<CorrelationPoint>,
    pub correlation: Vec<CorrelationRow>,
    pub maps: Vec<RetainedMap>,
}

fn examples<'a>(ds: &'a Dataset, idx: &[usize]) -> Vec<Example<'a>> {
    idx.iter()
        .map(|&i| Example {
            image: &ds.records[i].image,
            label: ds.records[i].label,
        })
        .collect()
}

fn labels_of(ds: &Dataset, idx: &[usize]) -> Vec<bool> {
    idx.iter().map(|&i| ds.records[i].label).collect()
}

/// Trains the mini-CNN for one scenario.
pub fn train_scenario(ds: &Dataset, scenario: &SplitScenario, base: &TrainConfig) -> Result<TrainOutcome> {
    let cfg = TrainConfig {
        seed: rng::mix(base.seed, scenario.index as u64),
        ..base.clone()
    };
    minicnn::train(&examples(ds, &scenario.train), &examples(ds, &scenario.val), &cfg)
        .context_with(|| format!("training scenario {}", scenario.index))
}

/// Trains one model per scenario of `make_splits(labels, seed)`.
pub fn train_all(ds: &Dataset, train: &TrainConfig, seed: u64) -> Result<Vec<TrainOutcome>> {
    let splits = make_splits(&labels_of_all(ds), seed)?;
    splits
        .scenarios
        .iter()
        .map(|s| {
            log::info!("training scenario {}", s.index);
            train_scenario(ds, s, &TrainConfig { seed, ..train.clone() })
        })
        .collect()
}

fn labels_of_all(ds: &Dataset) -> Vec<bool> {
    ds.records.iter().map(|r| r.label).collect()
}

enum Scorer<'a> {
    Mini(&'a MiniCnnModel),
    Bundle,
}

impl Scorer<'_> {
    fn score(&self, r: &SampleRecord) -> Result<f64> {
        match self {
            Scorer::Mini(m) => Ok(m.predict_proba(&r.image)? as f64),
            Scorer::Bundle => Ok(precomputed(r)?.score as f64),
        }
    }

    fn scores(&self, ds: &Dataset, idx: &[usize]) -> Result<Vec<f64>> {
        idx.iter()
            .map(|&i| {
                self.score(&ds.records[i])
                    .context_with(|| format!("scoring sample '{}'", ds.records[i].id))
            })
            .collect()
    }
}

fn precomputed(r: &SampleRecord) -> Result<&crate::dataset::Precomputed> {
    r.precomputed.as_ref().ok_or_else(|| {
        Error::Config(format!(
            "bundle mode: sample '{}' has no exported model tensors",
            r.id
        ))
    })
}

fn check_bundle_inputs(ds: &Dataset, methods: &[CamMethod]) -> Result<()> {
    for r in &ds.records {
        let p = precomputed(r)?;
        if r.masks.is_empty() {
            continue;
        }
        for &m in methods {
            if m.needs_gradients() && p.grads.is_none() {
                return Err(Error::Config(format!(
                    "bundle mode: {m} needs gradients but sample '{}' has none",
                    r.id
                )));
            }
            if m == CamMethod::ScoreCam && p.scorecam_scores.is_none() {
                return Err(Error::Config(format!(
                    "bundle mode: score-cam needs a score vector but sample '{}' has none and no model is available",
                    r.id
                )));
            }
        }
    }
    Ok(())
}

fn evaluate(
    scorer: &Scorer<'_>,
    ds: &Dataset,
    val: &[usize],
    test: &[usize],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<MetricsReport> {
    let val_scores = scorer.scores(ds, val)?;
    let tau = select_threshold(&val_scores, &labels_of(ds, val), cfg.criterion)
        .context_with(|| "choosing the threshold on validation data".to_string())?
        .tau;
    let test_scores = scorer.scores(ds, test)?;
    metrics_report(&test_scores, &labels_of(ds, test), tau, cfg.bootstrap, seed)
        .context_with(|| "evaluating test data".to_string())
}

struct Explained {
    score: f64,
    target: usize,
    maps: Vec<(CamMethod, SaliencyMap, FocusRegion)>,
}

fn explain_sample(scorer: &Scorer<'_>, r: &SampleRecord, cfg: &ExperimentConfig) -> Result<Explained> {
    let needs_grads = cfg.methods.iter().any(|m| m.needs_gradients());
    let label = usize::from(r.label);
    let (score, target, acts, grads): (f64, usize, LayerActivations, Option<LayerGradients>) =
        match scorer {
            Scorer::Mini(model) => {
                let (logits, acts) = model.forward(&r.image)?;
                let l = logits.data();
                let predicted = usize::from(l[1] > l[0]);
                let target = match cfg.target_class {
                    TargetClass::Predicted => predicted,
                    TargetClass::Label => label,
                };
                let grads = if needs_grads {
                    Some(model.backward_to_activations(&r.image, target)?)
                } else {
                    None
                };
                (model.predict_proba(&r.image)? as f64, target, acts, grads)
            }
            Scorer::Bundle => {
                let p = precomputed(r)?;
                let target = match cfg.target_class {
                    TargetClass::Predicted => usize::from(p.score >= 0.5),
                    TargetClass::Label => label,
                };
                (p.score as f64, target, p.acts.clone(), p.grads.clone())
            }
        };
    let mut maps = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let scores = match scorer {
            Scorer::Mini(model) => Some(ScoreSource::Oracle(*model)),
            Scorer::Bundle => precomputed(r)?
                .scorecam_scores
                .as_deref()
                .map(ScoreSource::Table),
        };
        let saliency = cam::compute(
            method,
            CamInputs {
                acts: &acts,
                grads: grads.as_ref(),
                input: &r.image,
                class_idx: target,
                scores,
            },
        )
        .context_with(|| format!("{method}"))?;
        let region = top_fraction_region(&saliency, cfg.fraction)?;
        maps.push((method, saliency, region));
    }
    Ok(Explained { score, target, maps })
}

/// Groups ratios by (method, anatomy) and runs the paired t-test on each group.
/// Group members keep their order in `ratios`.
pub fn explanation_table(ratios: &[SampleRatio]) -> Result<Vec<ExplanationRow>> {
    let mut groups: BTreeMap<(CamMethod, &str), Vec<&RatioRecord>> = BTreeMap::new();
    for r in ratios {
        groups
            .entry((r.method, r.anatomy.as_str()))
            .or_default()
            .push(&r.record);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((method, anatomy), recs) in groups {
        let act: Vec<f64> = recs.iter().map(|r| r.activation_ratio).collect();
        let st: Vec<f64> = recs.iter().map(|r| r.structure_ratio).collect();
        let diff: Vec<f64> = recs.iter().map(|r| r.difference).collect();
        let test = if recs.len() < 2 {
            None
        } else {
            match paired_t_test(&PairedSamples::new(act.clone(), st.clone())?) {
                Ok(t) => Some(t),
                Err(Error::DegenerateVariance(msg)) => {
                    log::warn!("{method} / {anatomy}: no t-test ({msg})");
                    None
                }
                Err(e) => return Err(e),
            }
        };
        rows.push(ExplanationRow {
            method,
            anatomy: anatomy.to_string(),
            n: recs.len(),
            activation: MeanSe::of(&act),
            structure: MeanSe::of(&st),
            difference: MeanSe::of(&diff),
            test,
        });
    }
    Ok(rows)
}

/// One point per (scenario, method, anatomy) present in `ratios`.
pub fn correlation_points(
    model: &str,
    scenarios: &[ScenarioOutcome],
    ratios: &[SampleRatio],
) -> Vec<CorrelationPoint> {
    let mut groups: BTreeMap<(usize, CamMethod, &str), Vec<f64>> = BTreeMap::new();
    for r in ratios {
        groups
            .entry((r.scenario, r.method, r.anatomy.as_str()))
            .or_default()
            .push(r.record.activation_ratio);
    }
    let mut points = Vec::new();
    for ((scenario, method, anatomy), act) in groups {
        let auroc = scenarios
            .iter()
            .find(|s| s.evaluation == Evaluation::Internal && s.scenario == scenario)
            .and_then(|s| s.metrics.get(Metric::Auroc).value);
        if let Some(auroc) = auroc {
            points.push(CorrelationPoint {
                scenario: scenario.to_string(),
                model: model.to_string(),
                method,
                anatomy: anatomy.to_string(),
                auroc,
                mean_activation_ratio: mean(&act),
            });
        }
    }
    points
}

fn correlate(points: &[&CorrelationPoint]) -> Result<(Option<CorrelationResult>, Option<CorrelationResult>)> {
    if points.len() < 3 {
        return Ok((None, None));
    }
    let s = PairedSamples::new(
        points.iter().map(|p| p.auroc).collect(),
        points.iter().map(|p| p.mean_activation_ratio).collect(),
    )?;
    let absent = |r: Result<CorrelationResult>| match r {
        Ok(c) => Ok(Some(c)),
        Err(Error::DegenerateVariance(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok((absent(pearson(&s))?, absent(spearman(&s))?))
}

/// Pearson and Spearman of AUROC against mean activation ratio, per anatomy:
/// first pooled over methods, then per method.
pub fn correlation_table(points: &[CorrelationPoint]) -> Result<Vec<CorrelationRow>> {
    let mut anatomies: Vec<&str> = points.iter().map(|p| p.anatomy.as_str()).collect();
    anatomies.sort_unstable();
    anatomies.dedup();
    let mut rows = Vec::new();
    for anatomy in anatomies {
        let of_anatomy: Vec<&CorrelationPoint> =
            points.iter().filter(|p| p.anatomy == anatomy).collect();
        let mut methods: Vec<CamMethod> = of_anatomy.iter().map(|p| p.method).collect();
        methods.sort_unstable();
        methods.dedup();
        let (pe, sp) = correlate(&of_anatomy)?;
        rows.push(CorrelationRow {
            anatomy: anatomy.to_string(),
            method: None,
            n: of_anatomy.len(),
            pearson: pe,
            spearman: sp,
        });
        for m in methods {
            let sub: Vec<&CorrelationPoint> =
                of_anatomy.iter().copied().filter(|p| p.method == m).collect();
            let (pe, sp) = correlate(&sub)?;
            rows.push(CorrelationRow {
                anatomy: anatomy.to_string(),
                method: Some(m),
                n: sub.len(),
                pearson: pe,
                spearman: sp,
            });
        }
    }
    Ok(rows)
}

/// Runs all six scenarios on `ds`; with `external`, each scenario's model is
/// also evaluated on a stratified 50:50 validation/test split of it.
pub fn run_experiment(
    ds: &Dataset,
    external: Option<&Dataset>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.mode == Mode::Bundle {
        check_bundle_inputs(ds, &cfg.methods)?;
        if let Some(ext) = external {
            for r in &ext.records {
                precomputed(r)?;
            }
        }
    }
    let splits = make_splits(&labels_of_all(ds), cfg.seed)?;
    let ext_split = external
        .map(|e| external_split(&labels_of_all(e), cfg.seed))
        .transpose()?;
    let model_name = match cfg.mode {
        Mode::Mini => "mini-cnn".to_string(),
        Mode::Bundle => ds.model.clone().unwrap_or_else(|| "external".into()),
    };

    let mut report = ExperimentReport {
        model: model_name,
        scenarios: Vec::new(),
        external: Vec::new(),
        ratios: Vec::new(),
        explanation: Vec::new(),
        points: Vec::new(),
        correlation: Vec::new(),
        maps: Vec::new(),
    };

    for scenario in &splits.scenarios {
        let k = scenario.index;
        log::info!(
            "scenario {k}: {} train / {} val / {} test",
            scenario.train.len(),
            scenario.val.len(),
            scenario.test.len()
        );
        let trained;
        let scorer = match cfg.mode {
            Mode::Bundle => Scorer::Bundle,
            Mode::Mini => match &cfg.models {
                Some(models) => Scorer::Mini(&models[k - 1]),
                None => {
                    trained = train_scenario(ds, scenario, &TrainConfig { seed: cfg.seed, ..cfg.train.clone() })?;
                    log::info!(
                        "scenario {k}: best epoch {} of {}",
                        trained.best_epoch,
                        trained.history.len()
                    );
                    Scorer::Mini(&trained.model)
                }
            },
        };
        let boot_seed = rng::mix(cfg.seed, 1000 + k as u64);
        let metrics = evaluate(&scorer, ds, &scenario.val, &scenario.test, cfg, boot_seed)
            .context_with(|| format!("scenario {k}"))?;
        report.scenarios.push(ScenarioOutcome {
            evaluation: Evaluation::Internal,
            scenario: k,
            test_size: scenario.test.len(),
            metrics,
        });

        if let (Some(ext), Some((val, test))) = (external, &ext_split) {
            if cfg.mode == Mode::Mini || k == 1 {
                let metrics = evaluate(&scorer, ext, val, test, cfg, rng::mix(boot_seed, 0xE7))
                    .context_with(|| format!("external evaluation, scenario {k}"))?;
                report.external.push(ScenarioOutcome {
                    evaluation: Evaluation::External,
                    scenario: k,
                    test_size: test.len(),
                    metrics,
                });
            }
        }

        for &i in &scenario.test {
            let r = &ds.records[i];
            if r.masks.is_empty() {
                continue;
            }
            let ex = explain_sample(&scorer, r, cfg)
                .context_with(|| format!("scenario {k}, sample '{}'", r.id))?;
            for (method, saliency, region) in ex.maps {
                for (anatomy, mask) in &r.masks {
                    report.ratios.push(SampleRatio {
                        scenario: k,
                        sample_id: r.id.clone(),
                        label: r.label,
                        score: ex.score,
                        target_class: ex.target,
                        method,
                        anatomy: anatomy.clone(),
                        record: RatioRecord::measure(&region, mask)
                            .context_with(|| format!("sample '{}' anatomy '{anatomy}'", r.id))?,
                    });
                }
                if k == 1 && report.maps.len() < cfg.keep_maps {
                    report.maps.push(RetainedMap {
                        scenario: k,
                        sample_id: r.id.clone(),
                        method,
                        image: r.image.clone(),
                        saliency,
                        region,
                        anatomy: r.masks.iter().next().map(|(n, m)| (n.clone(), m.clone())),
                    });
                }
            }
        }
    }

    report.explanation = explanation_table(&report.ratios)?;
    report.points = correlation_points(&report.model, &report.scenarios, &report.ratios);
    report.correlation = correlation_table(&report.points)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focus::RatioRecord;

    fn ratio(method: CamMethod, act: f64, st: f64, scenario: usize) -> SampleRatio {
        SampleRatio {
            scenario,
            sample_id: format!("s{scenario}"),
            label: true,
            score: 0.9,
            target_class: 1,
            method,
            anatomy: "disk".into(),
            record: RatioRecord::new(act, st),
        }
    }

    #[test]
    fn explanation_rows_group_and_test() {
        let ratios = vec![
            ratio(CamMethod::GradCam, 0.5, 0.1, 1),
            ratio(CamMethod::GradCam, 0.7, 0.2, 1),
            ratio(CamMethod::GradCam, 0.6, 0.1, 2),
            ratio(CamMethod::EigenCam, 0.2, 0.1, 1),
        ];
        let rows = explanation_table(&ratios).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].method, CamMethod::GradCam);
        assert_eq!(rows[0].n, 3);
        assert!((rows[0].difference.mean - (rows[0].activation.mean - rows[0].structure.mean)).abs() < 1e-12);
        assert!(rows[0].test.is_some());
        assert!(rows[1].test.is_none());
    }

    #[test]
    fn bundle_mode_requires_scorecam_scores() {
        use crate::dataset::Precomputed;
        use crate::focus::BinaryMask;
        let mut records = Vec::new();
        for i in 0..9 {
            let acts = LayerActivations::new(Tensor::filled(&[2, 2, 2], 1.0).unwrap()).unwrap();
            let mut masks = BTreeMap::new();
            masks.insert(
                "disk".to_string(),
                AnatomyMask::from_mask(BinaryMask::new(4, 4, vec![true; 16]).unwrap()),
            );
            records.push(SampleRecord {
                id: format!("b{i}"),
                label: i % 2 == 0,
                image: Tensor::zeros(&[1, 4, 4]).unwrap(),
                masks,
                precomputed: Some(Precomputed {
                    acts,
                    grads: None,
                    score: 0.5,
                    scorecam_scores: None,
                }),
            });
        }
        let ds = Dataset::new(records).unwrap();
        let cfg = ExperimentConfig {
            mode: Mode::Bundle,
            methods: vec![CamMethod::ScoreCam],
            fraction: 0.25,
            bootstrap: 50,
            ..ExperimentConfig::default()
        };
        assert!(matches!(run_experiment(&ds, None, &cfg), Err(Error::Config(_))));
        let cfg = ExperimentConfig {
            methods: vec![CamMethod::EigenCam],
            ..cfg
        };
        run_experiment(&ds, None, &cfg).unwrap();
    }
}
