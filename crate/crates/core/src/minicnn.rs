//! A two-convolution grayscale classifier with hand-written forward and
//! backward passes.
//!
//! ```text
//! input 1×H×W
//!   conv 3×3 (8)  → ReLU → max-pool 2×2
//!   conv 3×3 (16) → ReLU → max-pool 2×2   ← explanation layer, 16×H/4×W/4
//!   global average pool → fully connected 16→2 (logits)
//! ```
//!
//! Parameters and arithmetic are `f64` internally so finite-difference
//! checks are meaningful; tensors crossing the public boundary are `f32`.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::bundle::{Bundle, BundleError};
use crate::cam::{LayerActivations, LayerGradients, ModelOracle};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

pub const IN_CHANNELS: usize = 1;
pub const CONV1_FILTERS: usize = 8;
pub const CONV2_FILTERS: usize = 16;
pub const CLASSES: usize = 2;
const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL;

/// Every learnable tensor of the network. Also used for gradients and
/// momentum buffers, which share the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub conv1_w: Vec<f64>,
    pub conv1_b: Vec<f64>,
    pub conv2_w: Vec<f64>,
    pub conv2_b: Vec<f64>,
    pub fc_w: Vec<f64>,
    pub fc_b: Vec<f64>,
}

impl Params {
    /// Checkpoint entry names and dims, in file order.
    pub const LAYOUT: [(&'static str, &'static [usize]); 6] = [
        ("conv1.w", &[CONV1_FILTERS, IN_CHANNELS, KERNEL, KERNEL]),
        ("conv1.b", &[CONV1_FILTERS]),
        ("conv2.w", &[CONV2_FILTERS, CONV1_FILTERS, KERNEL, KERNEL]),
        ("conv2.b", &[CONV2_FILTERS]),
        ("fc.w", &[CLASSES, CONV2_FILTERS]),
        ("fc.b", &[CLASSES]),
    ];

    pub fn zeros() -> Self {
        Self {
            conv1_w: vec![0.0; CONV1_FILTERS * IN_CHANNELS * TAPS],
            conv1_b: vec![0.0; CONV1_FILTERS],
            conv2_w: vec![0.0; CONV2_FILTERS * CONV1_FILTERS * TAPS],
            conv2_b: vec![0.0; CONV2_FILTERS],
            fc_w: vec![0.0; CLASSES * CONV2_FILTERS],
            fc_b: vec![0.0; CLASSES],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 6] {
        [
            &self.conv1_w,
            &self.conv1_b,
            &self.conv2_w,
            &self.conv2_b,
            &self.fc_w,
            &self.fc_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc_w,
            &mut self.fc_b,
        ]
    }

    fn add_scaled(&mut self, other: &Params, scale: f64) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiniCnnModel {
    params: Params,
}

/// Intermediate values kept for the backward pass.
struct ForwardCache {
    h: usize,
    w: usize,
    input: Vec<f64>,
    z1: Vec<f64>,
    pool1: Vec<f64>,
    pool1_idx: Vec<usize>,
    z2: Vec<f64>,
    pool2: Vec<f64>,
    pool2_idx: Vec<usize>,
    features: Vec<f64>,
    logits: [f64; CLASSES],
}

fn image_plane(image: &Tensor) -> Result<(usize, usize, Vec<f64>)> {
    let (h, w) = match image.dims() {
        [1, h, w] | [h, w] => (*h, *w),
        other => {
            return Err(Error::Dimension(format!(
                "mini-CNN takes a 1 x H x W image, got {other:?}"
            )))
        }
    };
    if h % 4 != 0 || w % 4 != 0 {
        return Err(Error::Dimension(format!(
            "mini-CNN needs H and W divisible by 4, got {h}x{w}"
        )));
    }
    Ok((h, w, image.data().iter().map(|&v| v as f64).collect()))
}

// 3×3 convolution, stride 1, zero padding 1.
fn conv3x3(
    input: &[f64],
    in_c: usize,
    h: usize,
    w: usize,
    weights: &[f64],
    bias: &[f64],
    out_c: usize,
) -> Vec<f64> {
    let plane = h * w;
    let mut out = vec![0.0; out_c * plane];
    for o in 0..out_c {
        let out_plane = &mut out[o * plane..(o + 1) * plane];
        out_plane.iter_mut().for_each(|v| *v = bias[o]);
        for i in 0..in_c {
            let in_plane = &input[i * plane..(i + 1) * plane];
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let wt = weights[((o * in_c + i) * KERNEL + ky) * KERNEL + kx];
                    let x_lo = 1usize.saturating_sub(kx);
                    let x_hi = (w + 1 - kx).min(w);
                    for y in 0..h {
                        let iy = y + ky;
                        if iy < 1 || iy > h {
                            continue;
                        }
                        let in_row = &in_plane[(iy - 1) * w..iy * w];
                        let out_row = &mut out_plane[y * w..(y + 1) * w];
                        for x in x_lo..x_hi {
                            out_row[x] += wt * in_row[x + kx - 1];
                        }
                    }
                }
            }
        }
    }
    out
}

// Gradients of a 3×3 convolution given the gradient of its output. Returns
// (d_weights, d_bias, d_input); d_input is skipped when `want_input` is false.
fn conv3x3_backward(
    input: &[f64],
    in_c: usize,
    h: usize,
    w: usize,
    weights: &[f64],
    d_out: &[f64],
    out_c: usize,
    want_input: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let plane = h * w;
    let mut d_w = vec![0.0; out_c * in_c * TAPS];
    let mut d_b = vec![0.0; out_c];
    let mut d_in = if want_input {
        vec![0.0; in_c * plane]
    } else {
        Vec::new()
    };
    for o in 0..out_c {
        let g_plane = &d_out[o * plane..(o + 1) * plane];
        d_b[o] = g_plane.iter().sum();
        for i in 0..in_c {
            let in_plane = &input[i * plane..(i + 1) * plane];
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let widx = ((o * in_c + i) * KERNEL + ky) * KERNEL + kx;
                    let wt = weights[widx];
                    let x_lo = 1usize.saturating_sub(kx);
                    let x_hi = (w + 1 - kx).min(w);
                    let mut acc = 0.0;
                    for y in 0..h {
                        let iy = y + ky;
                        if iy < 1 || iy > h {
                            continue;
                        }
                        let in_off = (iy - 1) * w;
                        let g_row = &g_plane[y * w..(y + 1) * w];
                        let in_row = &in_plane[in_off..in_off + w];
                        for x in x_lo..x_hi {
                            acc += g_row[x] * in_row[x + kx - 1];
                        }
                        if want_input {
                            let d_row = &mut d_in[i * plane + in_off..i * plane + in_off + w];
                            for x in x_lo..x_hi {
                                d_row[x + kx - 1] += wt * g_row[x];
                            }
                        }
                    }
                    d_w[widx] = acc;
                }
            }
        }
    }
    (d_w, d_b, d_in)
}

// 2×2 max-pool with stride 2 on ReLU'd input. Ties pick the first position in
// row-major order. Returns pooled values and the flat source index of each.
fn relu_maxpool2(z: &[f64], c: usize, h: usize, w: usize) -> (Vec<f64>, Vec<usize>) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = base + 2 * y * w + 2 * x;
                let mut best_v = z[best].max(0.0);
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let k = base + (2 * y + dy) * w + 2 * x + dx;
                    let v = z[k].max(0.0);
                    if v > best_v {
                        best = k;
                        best_v = v;
                    }
                }
                out.push(best_v);
                idx.push(best);
            }
        }
    }
    (out, idx)
}

// Routes pooled gradients back to their argmax and applies the ReLU mask.
fn relu_maxpool2_backward(d_pool: &[f64], idx: &[usize], z: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; z.len()];
    for (&g, &k) in d_pool.iter().zip(idx) {
        if z[k] > 0.0 {
            d[k] += g;
        }
    }
    d
}

fn softmax2(logits: &[f64; CLASSES]) -> [f64; CLASSES] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

impl MiniCnnModel {
    pub fn from_params(params: Params) -> Result<Self> {
        for (t, (name, dims)) in params.tensors().iter().zip(Params::LAYOUT) {
            if t.len() != dims.iter().product::<usize>() {
                return Err(Error::Dimension(format!(
                    "parameter {name} has {} values, expected dims {dims:?}",
                    t.len()
                )));
            }
        }
        if !params.is_finite() {
            return Err(Error::Parameter("non-finite model parameter".into()));
        }
        Ok(Self { params })
    }

    /// Uniform `±√(6 / fan_in)` weights, zero biases.
    pub fn init(seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let mut p = Params::zeros();
        let mut fill = |v: &mut Vec<f64>, fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            v.iter_mut()
                .for_each(|x| *x = r.random_range(-bound..bound));
        };
        fill(&mut p.conv1_w, IN_CHANNELS * TAPS);
        fill(&mut p.conv2_w, CONV1_FILTERS * TAPS);
        fill(&mut p.fc_w, CONV2_FILTERS);
        Self { params: p }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward_cached(&self, image: &Tensor) -> Result<ForwardCache> {
        let (h, w, input) = image_plane(image)?;
        let p = &self.params;
        let z1 = conv3x3(&input, IN_CHANNELS, h, w, &p.conv1_w, &p.conv1_b, CONV1_FILTERS);
        let (pool1, pool1_idx) = relu_maxpool2(&z1, CONV1_FILTERS, h, w);
        let (h2, w2) = (h / 2, w / 2);
        let z2 = conv3x3(&pool1, CONV1_FILTERS, h2, w2, &p.conv2_w, &p.conv2_b, CONV2_FILTERS);
        let (pool2, pool2_idx) = relu_maxpool2(&z2, CONV2_FILTERS, h2, w2);
        let features = global_average(&pool2, CONV2_FILTERS);
        let logits = self.head(&features);
        Ok(ForwardCache {
            h,
            w,
            input,
            z1,
            pool1,
            pool1_idx,
            z2,
            pool2,
            pool2_idx,
            features,
            logits,
        })
    }

    fn head(&self, features: &[f64]) -> [f64; CLASSES] {
        let p = &self.params;
        let mut logits = [0.0; CLASSES];
        for (c, l) in logits.iter_mut().enumerate() {
            *l = p.fc_b[c]
                + features
                    .iter()
                    .zip(&p.fc_w[c * CONV2_FILTERS..(c + 1) * CONV2_FILTERS])
                    .map(|(f, w)| f * w)
                    .sum::<f64>();
        }
        logits
    }

    /// Logits and explanation-layer activations (`16 × H/4 × W/4`).
    pub fn forward(&self, image: &Tensor) -> Result<(Tensor, LayerActivations)> {
        let cache = self.forward_cached(image)?;
        let logits = Tensor::new(
            vec![CLASSES],
            cache.logits.iter().map(|&v| v as f32).collect(),
        )?;
        let acts = Tensor::new(
            vec![CONV2_FILTERS, cache.h / 4, cache.w / 4],
            cache.pool2.iter().map(|&v| v as f32).collect(),
        )?;
        Ok((logits, LayerActivations::new(acts)?))
    }

    pub fn logits(&self, image: &Tensor) -> Result<[f64; CLASSES]> {
        Ok(self.forward_cached(image)?.logits)
    }

    /// Logits computed from given explanation-layer activations.
    pub fn logits_from_activations(&self, acts: &LayerActivations) -> Result<[f64; CLASSES]> {
        if acts.channels() != CONV2_FILTERS {
            return Err(Error::Dimension(format!(
                "expected {CONV2_FILTERS} channels, got {}",
                acts.channels()
            )));
        }
        let values: Vec<f64> = acts.maps().data().iter().map(|&v| v as f64).collect();
        Ok(self.head(&global_average(&values, CONV2_FILTERS)))
    }

    /// Probability of class 1.
    pub fn predict_proba(&self, image: &Tensor) -> Result<f32> {
        Ok(softmax2(&self.logits(image)?)[1] as f32)
    }

    pub fn predicted_class(&self, image: &Tensor) -> Result<usize> {
        let l = self.logits(image)?;
        Ok(usize::from(l[1] > l[0]))
    }

    /// Gradient of the pre-softmax logit of `class_idx` with respect to the
    /// explanation-layer activations.
    pub fn backward_to_activations(&self, image: &Tensor, class_idx: usize) -> Result<LayerGradients> {
        check_class(class_idx)?;
        let cache = self.forward_cached(image)?;
        let d_pool2 = self.d_pool2(&cache, one_hot(class_idx));
        let t = Tensor::new(
            vec![CONV2_FILTERS, cache.h / 4, cache.w / 4],
            d_pool2.iter().map(|&v| v as f32).collect(),
        )?;
        LayerGradients::new(t)
    }

    fn d_pool2(&self, cache: &ForwardCache, d_logits: [f64; CLASSES]) -> Vec<f64> {
        let spatial = cache.pool2.len() / CONV2_FILTERS;
        let mut d = vec![0.0; cache.pool2.len()];
        for k in 0..CONV2_FILTERS {
            let dg: f64 = (0..CLASSES)
                .map(|c| d_logits[c] * self.params.fc_w[c * CONV2_FILTERS + k])
                .sum();
            d[k * spatial..(k + 1) * spatial]
                .iter_mut()
                .for_each(|v| *v = dg / spatial as f64);
        }
        d
    }

    fn backward(&self, cache: &ForwardCache, d_logits: [f64; CLASSES]) -> Params {
        let mut g = Params::zeros();
        for c in 0..CLASSES {
            g.fc_b[c] = d_logits[c];
            for k in 0..CONV2_FILTERS {
                g.fc_w[c * CONV2_FILTERS + k] = d_logits[c] * cache.features[k];
            }
        }
        let d_pool2 = self.d_pool2(cache, d_logits);
        let dz2 = relu_maxpool2_backward(&d_pool2, &cache.pool2_idx, &cache.z2);
        let (h2, w2) = (cache.h / 2, cache.w / 2);
        let (dw2, db2, d_pool1) = conv3x3_backward(
            &cache.pool1,
            CONV1_FILTERS,
            h2,
            w2,
            &self.params.conv2_w,
            &dz2,
            CONV2_FILTERS,
            true,
        );
        g.conv2_w = dw2;
        g.conv2_b = db2;
        let dz1 = relu_maxpool2_backward(&d_pool1, &cache.pool1_idx, &cache.z1);
        let (dw1, db1, _) = conv3x3_backward(
            &cache.input,
            IN_CHANNELS,
            cache.h,
            cache.w,
            &self.params.conv1_w,
            &dz1,
            CONV1_FILTERS,
            false,
        );
        g.conv1_w = dw1;
        g.conv1_b = db1;
        g
    }

    /// Gradient of `Σ_c d_logits[c] · logit_c` with respect to every parameter.
    pub fn parameter_gradients(&self, image: &Tensor, d_logits: [f64; CLASSES]) -> Result<Params> {
        let cache = self.forward_cached(image)?;
        Ok(self.backward(&cache, d_logits))
    }

    pub fn to_bundle(&self) -> Result<Bundle, BundleError> {
        let mut b = Bundle::new();
        for (t, (name, dims)) in self.params.tensors().into_iter().zip(Params::LAYOUT) {
            let data = t.iter().map(|&v| v as f32).collect();
            let tensor = Tensor::new(dims.to_vec(), data).expect("layout dims are valid");
            b.insert(name, tensor)?;
        }
        Ok(b)
    }

    pub fn from_bundle(bundle: &Bundle) -> Result<Self> {
        let mut p = Params::zeros();
        for (dst, (name, dims)) in p.tensors_mut().into_iter().zip(Params::LAYOUT) {
            let t = bundle.require(name)?;
            if t.dims() != dims {
                return Err(Error::Dimension(format!(
                    "checkpoint entry {name} has dims {:?}, expected {dims:?}",
                    t.dims()
                )));
            }
            *dst = t.data().iter().map(|&v| v as f64).collect();
        }
        Self::from_params(p)
    }
}

impl ModelOracle for MiniCnnModel {
    /// Pre-softmax logit of `class_idx`.
    fn score(&self, image: &Tensor, class_idx: usize) -> Result<f32> {
        check_class(class_idx)?;
        Ok(self.logits(image)?[class_idx] as f32)
    }
}

fn check_class(class_idx: usize) -> Result<()> {
    if class_idx >= CLASSES {
        return Err(Error::Parameter(format!(
            "class index {class_idx} outside 0..{CLASSES}"
        )));
    }
    Ok(())
}

fn one_hot(class_idx: usize) -> [f64; CLASSES] {
    let mut d = [0.0; CLASSES];
    d[class_idx] = 1.0;
    d
}

fn global_average(maps: &[f64], channels: usize) -> Vec<f64> {
    let spatial = maps.len() / channels;
    maps.chunks(spatial)
        .map(|c| c.iter().sum::<f64>() / spatial as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub decay_factor: f64,
    pub patience: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            momentum: 0.9,
            decay_factor: 0.9,
            patience: 10,
            epochs: 100,
            batch_size: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor < 1.0) {
            return Err(Error::Config(format!(
                "decay factor must be in (0, 1), got {}",
                self.decay_factor
            )));
        }
        if self.patience == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("patience, epochs and batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Multiplies the learning rate by `decay_factor` each time the monitored
/// loss has gone `patience` consecutive epochs without a strict improvement.
#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    lr: f64,
    decay_factor: f64,
    patience: usize,
    best: f64,
    stale_epochs: usize,
}

impl PlateauScheduler {
    pub fn new(lr: f64, decay_factor: f64, patience: usize) -> Self {
        Self {
            lr,
            decay_factor,
            patience,
            best: f64::INFINITY,
            stale_epochs: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Records one epoch's loss; returns true when it is a new best.
    pub fn step(&mut self, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.stale_epochs = 0;
            return true;
        }
        self.stale_epochs += 1;
        if self.stale_epochs >= self.patience {
            self.lr *= self.decay_factor;
            self.stale_epochs = 0;
        }
        false
    }
}

/// One labelled training image.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub image: &'a Tensor,
    pub label: bool,
}

/// Inverse-frequency class weights `n / (2·n_c)`, indexed by class.
pub fn class_weights(labels: impl IntoIterator<Item = bool>) -> Result<[f64; CLASSES]> {
    let mut counts = [0usize; CLASSES];
    for l in labels {
        counts[usize::from(l)] += 1;
    }
    if counts.contains(&0) {
        return Err(Error::DegenerateClass(format!(
            "training data needs both classes, got {} negative / {} positive",
            counts[0], counts[1]
        )));
    }
    let n = (counts[0] + counts[1]) as f64;
    Ok([n / (2.0 * counts[0] as f64), n / (2.0 * counts[1] as f64)])
}

/// Class-weighted mean cross-entropy, `Σ w_i·CE_i / Σ w_i`.
pub fn weighted_loss(
    model: &MiniCnnModel,
    data: &[Example<'_>],
    weights: &[f64; CLASSES],
) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for ex in data {
        let p = softmax2(&model.logits(ex.image)?);
        let c = usize::from(ex.label);
        num += weights[c] * -p[c].max(f64::MIN_POSITIVE).ln();
        den += weights[c];
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: MiniCnnModel,
    pub initial_train_loss: f64,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
}

/// SGD with momentum on class-weighted cross-entropy, plateau learning-rate
/// decay driven by validation loss, best-validation checkpoint kept.
pub fn train(train_set: &[Example<'_>], val_set: &[Example<'_>], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let weights = class_weights(train_set.iter().map(|e| e.label))?;
    let mut model = MiniCnnModel::init(rng::mix(cfg.seed, 1));
    let mut shuffle = rng::seeded(rng::mix(cfg.seed, 2));
    let mut velocity = Params::zeros();
    let mut sched = PlateauScheduler::new(cfg.lr, cfg.decay_factor, cfg.patience);
    let initial_train_loss = weighted_loss(&model, train_set, &weights)?;
    let mut best = (model.clone(), 0usize);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        let lr = sched.lr();
        let (mut loss_sum, mut weight_sum) = (0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            let batch_weight: f64 = batch
                .iter()
                .map(|&i| weights[usize::from(train_set[i].label)])
                .sum();
            let mut grad = Params::zeros();
            for &i in batch {
                let ex = &train_set[i];
                let cache = model.forward_cached(ex.image)?;
                let p = softmax2(&cache.logits);
                let c = usize::from(ex.label);
                let wi = weights[c];
                loss_sum += wi * -p[c].max(f64::MIN_POSITIVE).ln();
                weight_sum += wi;
                let mut d_logits = p;
                d_logits[c] -= 1.0;
                let scale = wi / batch_weight;
                grad.add_scaled(&model.backward(&cache, d_logits), scale);
            }
            for (v, g) in velocity.tensors_mut().into_iter().zip(grad.tensors()) {
                for (vi, gi) in v.iter_mut().zip(g) {
                    *vi = cfg.momentum * *vi + gi;
                }
            }
            model.params.add_scaled(&velocity, -lr);
        }
        if !model.params.is_finite() {
            return Err(Error::Instability(format!("parameters diverged at epoch {epoch}")));
        }
        let val_loss = weighted_loss(&model, val_set, &weights)?;
        if sched.step(val_loss) {
            best = (model.clone(), epoch);
        }
        history.push(EpochStats {
            train_loss: loss_sum / weight_sum,
            val_loss,
            lr,
        });
        log::debug!("epoch {epoch}: train {:.4} val {val_loss:.4} lr {lr:.6}", loss_sum / weight_sum);
    }
    Ok(TrainOutcome {
        model: best.0,
        initial_train_loss,
        best_epoch: best.1,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(h: usize, w: usize, f: impl Fn(usize, usize) -> f32) -> Tensor {
        let data = (0..h * w).map(|i| f(i / w, i % w)).collect();
        Tensor::new(vec![1, h, w], data).unwrap()
    }

    #[test]
    fn zero_model_returns_bias() {
        let mut p = Params::zeros();
        p.fc_b = vec![0.3, -1.5];
        let m = MiniCnnModel::from_params(p).unwrap();
        let (logits, acts) = m.forward(&Tensor::zeros(&[1, 8, 8]).unwrap()).unwrap();
        assert_eq!(logits.data(), &[0.3, -1.5]);
        assert_eq!(acts.maps().dims(), &[16, 2, 2]);
    }

    #[test]
    fn identity_kernel_copies_input() {
        let input = image(4, 4, |y, x| (y * 4 + x) as f32 + 1.0);
        let data: Vec<f64> = input.data().iter().map(|&v| v as f64).collect();
        let mut kernel = vec![0.0; TAPS];
        kernel[4] = 1.0;
        let out = conv3x3(&data, 1, 4, 4, &kernel, &[0.0], 1);
        assert_eq!(out, data);
    }

    #[test]
    fn edge_kernel_uses_zero_padding() {
        let data = vec![1.0; 16];
        // Top-left tap reads (y-1, x-1): zero on the first row and column.
        let mut kernel = vec![0.0; TAPS];
        kernel[0] = 1.0;
        let out = conv3x3(&data, 1, 4, 4, &kernel, &[0.0], 1);
        assert_eq!(&out[..4], &[0.0; 4]);
        assert_eq!(out[4], 0.0);
        assert_eq!(out[5], 1.0);
    }

    #[test]
    fn doubling_fc_doubles_logits() {
        let m = MiniCnnModel::init(3);
        let img = image(8, 8, |y, x| ((y * 7 + x * 3) % 5) as f32 / 5.0);
        let mut doubled = m.clone();
        doubled.params.fc_w.iter_mut().for_each(|w| *w *= 2.0);
        let a = m.logits(&img).unwrap();
        let b = doubled.logits(&img).unwrap();
        for c in 0..2 {
            assert!((b[c] - 2.0 * a[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn maxpool_routes_to_argmax() {
        let z = vec![1.0, 4.0, 2.0, 3.0];
        let (out, idx) = relu_maxpool2(&z, 1, 2, 2);
        assert_eq!(out, vec![4.0]);
        assert_eq!(idx, vec![1]);
        assert_eq!(relu_maxpool2_backward(&[2.5], &idx, &z), vec![0.0, 2.5, 0.0, 0.0]);
    }

    #[test]
    fn maxpool_tie_routes_to_first() {
        let z = vec![3.0, 3.0, 3.0, 3.0];
        let (_, idx) = relu_maxpool2(&z, 1, 2, 2);
        assert_eq!(idx, vec![0]);
    }

    #[test]
    fn relu_blocks_negative_gradient() {
        let z = vec![-1.0, -4.0, -2.0, -3.0];
        let (out, idx) = relu_maxpool2(&z, 1, 2, 2);
        assert_eq!(out, vec![0.0]);
        assert_eq!(relu_maxpool2_backward(&[1.0], &idx, &z), vec![0.0; 4]);
    }

    #[test]
    fn class_gradients_are_linear() {
        let m = MiniCnnModel::init(11);
        let img = image(8, 8, |y, x| ((y * 3 + x) % 7) as f32 / 7.0);
        let g0 = m.backward_to_activations(&img, 0).unwrap();
        let g1 = m.backward_to_activations(&img, 1).unwrap();
        let cache = m.forward_cached(&img).unwrap();
        let both = m.d_pool2(&cache, [1.0, 1.0]);
        for ((a, b), s) in g0.maps().data().iter().zip(g1.maps().data()).zip(both) {
            assert!(((a + b) as f64 - s).abs() < 1e-6);
        }
        assert!(m.backward_to_activations(&img, 2).is_err());
    }

    #[test]
    fn zero_fc_gives_zero_gradients() {
        let mut m = MiniCnnModel::init(5);
        m.params.fc_w.iter_mut().for_each(|w| *w = 0.0);
        let img = image(8, 8, |y, x| (y + x) as f32 / 16.0);
        let g = m.backward_to_activations(&img, 1).unwrap();
        assert!(g.maps().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn proba_examples() {
        let mut p = Params::zeros();
        let img = Tensor::zeros(&[1, 4, 4]).unwrap();
        let m = MiniCnnModel::from_params(p.clone()).unwrap();
        assert_eq!(m.predict_proba(&img).unwrap(), 0.5);
        p.fc_b = vec![0.0, 20.0];
        let m = MiniCnnModel::from_params(p).unwrap();
        let p1 = m.predict_proba(&img).unwrap();
        assert!(p1 > 0.999);
        let p0 = softmax2(&m.logits(&img).unwrap())[0] as f32;
        assert!((p0 + p1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_shapes() {
        let m = MiniCnnModel::init(0);
        assert!(matches!(m.forward(&Tensor::zeros(&[1, 6, 8]).unwrap()), Err(Error::Dimension(_))));
        assert!(matches!(m.forward(&Tensor::zeros(&[3, 8, 8]).unwrap()), Err(Error::Dimension(_))));
    }

    #[test]
    fn class_weight_ratio() {
        let labels = (0..120).map(|i| i < 30);
        let w = class_weights(labels).unwrap();
        assert!((w[1] / w[0] - 3.0).abs() < 1e-12);
        assert!(matches!(class_weights([true, true]), Err(Error::DegenerateClass(_))));
    }

    #[test]
    fn scheduler_decays_after_patience() {
        let mut s = PlateauScheduler::new(0.001, 0.9, 10);
        for _ in 0..25 {
            s.step(1.0);
        }
        assert!((s.lr() - 0.001 * 0.9 * 0.9).abs() < 1e-18);
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = MiniCnnModel::init(9);
        let b = m.to_bundle().unwrap();
        let names: Vec<&str> = b.names().collect();
        assert_eq!(names, ["conv1.w", "conv1.b", "conv2.w", "conv2.b", "fc.w", "fc.b"]);
        let back = MiniCnnModel::from_bundle(&b).unwrap();
        assert_eq!(back.to_bundle().unwrap(), b);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            momentum: 1.0,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
    }
}
