//! Class activation maps.
//!
//! Every method reduces the explanation-layer activations (plus gradients or
//! oracle scores where the method needs them) to a single feature-resolution
//! map. That map then goes through the same finishing steps for all methods:
//! ReLU, corner-aligned bilinear upsampling to the input size, and per-image
//! min-max normalization.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::{bilinear_resize, minmax_f64, minmax_normalize, resize_f64, Tensor};

/// Post-nonlinearity activations `K × h × w` at the explanation layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivations(Tensor);

/// `∂(class logit)/∂A` with the same `K × h × w` layout as the activations.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients(Tensor);

fn check_khw(t: &Tensor, what: &str) -> Result<()> {
    if t.ndim() != 3 {
        return Err(Error::Dimension(format!(
            "{what} must be K x h x w, got {:?}",
            t.dims()
        )));
    }
    Ok(())
}

macro_rules! layer_tensor {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(maps: Tensor) -> Result<Self> {
                check_khw(&maps, $what)?;
                Ok(Self(maps))
            }

            pub fn maps(&self) -> &Tensor {
                &self.0
            }

            pub fn into_inner(self) -> Tensor {
                self.0
            }

            pub fn channels(&self) -> usize {
                self.0.dims()[0]
            }

            /// `(h, w)` of each channel.
            pub fn spatial(&self) -> (usize, usize) {
                (self.0.dims()[1], self.0.dims()[2])
            }

            pub fn channel(&self, k: usize) -> &[f32] {
                let (h, w) = self.spatial();
                &self.0.data()[k * h * w..(k + 1) * h * w]
            }
        }
    };
}

layer_tensor!(LayerActivations, "activations");
layer_tensor!(LayerGradients, "gradients");

/// Per-pixel importance at input resolution, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Tensor);

impl SaliencyMap {
    /// Wraps an existing 2-D map. Values must be finite and in `[0, 1]`.
    pub fn new(values: Tensor) -> Result<Self> {
        values.shape2()?;
        if values
            .data()
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(Error::Parameter(
                "saliency values must be finite and within [0, 1]".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Tensor {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        let d = self.0.dims();
        (d[0], d[1])
    }
}

/// Deterministic scoring function, the model `f` evaluated on arbitrary
/// (masked) inputs. Score-CAM is the only consumer.
pub trait ModelOracle {
    fn score(&self, image: &Tensor, class_idx: usize) -> Result<f32>;
}

/// Where Score-CAM obtains the per-channel scores of the masked inputs.
#[derive(Clone, Copy)]
pub enum ScoreSource<'a> {
    /// Query a live model once per channel.
    Oracle(&'a dyn ModelOracle),
    /// Scores computed ahead of time, one per channel in channel order.
    Table(&'a [f32]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CamMethod {
    GradCam,
    XGradCam,
    ScoreCam,
    EigenCam,
    LayerCam,
}

impl CamMethod {
    pub const ALL: [CamMethod; 5] = [
        CamMethod::GradCam,
        CamMethod::XGradCam,
        CamMethod::ScoreCam,
        CamMethod::EigenCam,
        CamMethod::LayerCam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CamMethod::GradCam => "grad-cam",
            CamMethod::XGradCam => "xgrad-cam",
            CamMethod::ScoreCam => "score-cam",
            CamMethod::EigenCam => "eigen-cam",
            CamMethod::LayerCam => "layer-cam",
        }
    }

    pub fn needs_gradients(self) -> bool {
        matches!(
            self,
            CamMethod::GradCam | CamMethod::XGradCam | CamMethod::LayerCam
        )
    }
}

impl fmt::Display for CamMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CamMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CamMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown CAM method '{s}'")))
    }
}

fn check_pair(acts: &LayerActivations, grads: &LayerGradients) -> Result<()> {
    if acts.maps().dims() != grads.maps().dims() {
        return Err(Error::Dimension(format!(
            "activations {:?} and gradients {:?} differ",
            acts.maps().dims(),
            grads.maps().dims()
        )));
    }
    Ok(())
}

fn weighted_sum(acts: &LayerActivations, weights: &[f64]) -> Vec<f64> {
    let (h, w) = acts.spatial();
    let mut acc = vec![0.0f64; h * w];
    for (k, &wk) in weights.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        for (a, &v) in acc.iter_mut().zip(acts.channel(k)) {
            *a += wk * v as f64;
        }
    }
    acc
}

// Feature maps stay in f64 until the saliency map is complete; rounding to
// f32 earlier is amplified by normalization when the map is nearly flat.
fn rectified_tensor(plane: Vec<f64>, (h, w): (usize, usize)) -> Result<Tensor> {
    Tensor::new(vec![h, w], plane.into_iter().map(|v| v.max(0.0) as f32).collect())
}

fn finish(mut plane: Vec<f64>, hw: (usize, usize), out: (usize, usize)) -> Result<SaliencyMap> {
    if out.0 == 0 || out.1 == 0 {
        return Err(Error::Dimension(format!(
            "saliency size {}x{} has a zero extent",
            out.0, out.1
        )));
    }
    plane.iter_mut().for_each(|v| *v = v.max(0.0));
    let mut up = resize_f64(&plane, hw, out);
    minmax_f64(&mut up);
    SaliencyMap::new(Tensor::new(
        vec![out.0, out.1],
        up.into_iter().map(|v| v as f32).collect(),
    )?)
}

/// Shared finishing steps: ReLU, upsample to `out`, min-max normalize.
pub fn finalize(feature_map: &Tensor, out: (usize, usize)) -> Result<SaliencyMap> {
    let hw = feature_map.shape2()?;
    finish(feature_map.data().iter().map(|&v| v as f64).collect(), hw, out)
}

/// Feature-resolution Grad-CAM map: channel weights are the spatial mean of
/// the gradients, combined linearly and rectified.
pub fn grad_cam_map(acts: &LayerActivations, grads: &LayerGradients) -> Result<Tensor> {
    rectified_tensor(grad_cam_plane(acts, grads)?, acts.spatial())
}

fn grad_cam_plane(acts: &LayerActivations, grads: &LayerGradients) -> Result<Vec<f64>> {
    check_pair(acts, grads)?;
    let weights: Vec<f64> = (0..acts.channels())
        .map(|k| {
            let g = grads.channel(k);
            g.iter().map(|&v| v as f64).sum::<f64>() / g.len() as f64
        })
        .collect();
    Ok(weighted_sum(acts, &weights))
}

/// Feature-resolution XGrad-CAM map. Channel weight is the activation-weighted
/// gradient sum divided by the activation sum; channels without activation
/// mass get weight zero.
pub fn xgrad_cam_map(acts: &LayerActivations, grads: &LayerGradients) -> Result<Tensor> {
    rectified_tensor(xgrad_cam_plane(acts, grads)?, acts.spatial())
}

fn xgrad_cam_plane(acts: &LayerActivations, grads: &LayerGradients) -> Result<Vec<f64>> {
    check_pair(acts, grads)?;
    let weights: Vec<f64> = (0..acts.channels())
        .map(|k| {
            let a = acts.channel(k);
            let g = grads.channel(k);
            let mass: f64 = a.iter().map(|&v| v as f64).sum();
            if mass == 0.0 {
                return 0.0;
            }
            let num: f64 = a.iter().zip(g).map(|(&a, &g)| a as f64 * g as f64).sum();
            num / mass
        })
        .collect();
    Ok(weighted_sum(acts, &weights))
}

/// Feature-resolution Layer-CAM map: `ReLU(Σ_k ReLU(g_k) ⊙ A_k)`.
pub fn layer_cam_map(acts: &LayerActivations, grads: &LayerGradients) -> Result<Tensor> {
    rectified_tensor(layer_cam_plane(acts, grads)?, acts.spatial())
}

fn layer_cam_plane(acts: &LayerActivations, grads: &LayerGradients) -> Result<Vec<f64>> {
    check_pair(acts, grads)?;
    let (h, w) = acts.spatial();
    let mut acc = vec![0.0f64; h * w];
    for k in 0..acts.channels() {
        for ((s, &a), &g) in acc.iter_mut().zip(acts.channel(k)).zip(grads.channel(k)) {
            *s += g.max(0.0) as f64 * a as f64;
        }
    }
    Ok(acc)
}

/// Each channel upsampled to the input's spatial size and min-max normalized,
/// ready to be multiplied into the input.
pub fn score_cam_masks(acts: &LayerActivations, input_hw: (usize, usize)) -> Result<Vec<Tensor>> {
    let (h, w) = acts.spatial();
    (0..acts.channels())
        .map(|k| {
            let chan = Tensor::new(vec![h, w], acts.channel(k).to_vec())?;
            let up = bilinear_resize(&chan, input_hw.0, input_hw.1)?;
            Ok(minmax_normalize(&up))
        })
        .collect()
}

/// Multiplies a `H × W` mask into every plane of an `[..., H, W]` image.
pub fn apply_mask(input: &Tensor, mask: &Tensor) -> Result<Tensor> {
    let (h, w) = input.spatial()?;
    if mask.dims() != [h, w] {
        return Err(Error::Dimension(format!(
            "mask {:?} does not match image {:?}",
            mask.dims(),
            input.dims()
        )));
    }
    let plane = h * w;
    let mut out = input.clone();
    for chunk in out.data_mut().chunks_mut(plane) {
        for (v, &m) in chunk.iter_mut().zip(mask.data()) {
            *v *= m;
        }
    }
    Ok(out)
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax(scores: &[f32]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let exps: Vec<f64> = scores.iter().map(|&s| (s as f64 - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Collects the `K` Score-CAM channel scores, either from a live oracle or a
/// precomputed table.
pub fn score_cam_scores(
    acts: &LayerActivations,
    input: &Tensor,
    class_idx: usize,
    source: ScoreSource<'_>,
) -> Result<Vec<f32>> {
    match source {
        ScoreSource::Table(scores) => {
            if scores.len() != acts.channels() {
                return Err(Error::Config(format!(
                    "score table has {} entries for {} channels",
                    scores.len(),
                    acts.channels()
                )));
            }
            Ok(scores.to_vec())
        }
        ScoreSource::Oracle(oracle) => {
            let masks = score_cam_masks(acts, input.spatial()?)?;
            masks
                .iter()
                .map(|m| oracle.score(&apply_mask(input, m)?, class_idx))
                .collect()
        }
    }
}

pub fn score_cam_map(acts: &LayerActivations, scores: &[f32]) -> Result<Tensor> {
    rectified_tensor(score_cam_plane(acts, scores)?, acts.spatial())
}

fn score_cam_plane(acts: &LayerActivations, scores: &[f32]) -> Result<Vec<f64>> {
    if scores.len() != acts.channels() {
        return Err(Error::Dimension(format!(
            "{} scores for {} channels",
            scores.len(),
            acts.channels()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Parameter("non-finite Score-CAM score".into()));
    }
    Ok(weighted_sum(acts, &softmax(scores)))
}

/// Leading right-singular vector of `M` (`hw × K`, one column per channel),
/// found by power iteration on the `K × K` Gram matrix `MᵀM`.
pub fn leading_right_singular_vector(acts: &LayerActivations) -> Vec<f64> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 1000;

    let k = acts.channels();
    let chans: Vec<&[f32]> = (0..k).map(|c| acts.channel(c)).collect();
    let mut gram = vec![0.0f64; k * k];
    for i in 0..k {
        for j in i..k {
            let dot: f64 = chans[i]
                .iter()
                .zip(chans[j])
                .map(|(&a, &b)| a as f64 * b as f64)
                .sum();
            gram[i * k + j] = dot;
            gram[j * k + i] = dot;
        }
    }

    // Non-uniform start so the iterate is not orthogonal to the leading
    // eigenvector for symmetric inputs.
    let mut v: Vec<f64> = (0..k).map(|i| 1.0 + i as f64 / (4.0 * k as f64)).collect();
    normalize_in_place(&mut v);
    for _ in 0..MAX_ITER {
        let mut next: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| gram[i * k + j] * v[j]).sum())
            .collect();
        if normalize_in_place(&mut next) == 0.0 {
            return vec![0.0; k];
        }
        // Align sign before measuring the change.
        if next.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            next.iter_mut().for_each(|x| *x = -*x);
        }
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < TOL {
            break;
        }
    }
    v
}

fn normalize_in_place(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Feature-resolution Eigen-CAM map: the activations projected on their
/// leading right-singular vector, sign chosen so the map sums to ≥ 0.
pub fn eigen_cam_map(acts: &LayerActivations) -> Result<Tensor> {
    rectified_tensor(eigen_cam_plane(acts), acts.spatial())
}

fn eigen_cam_plane(acts: &LayerActivations) -> Vec<f64> {
    let v = leading_right_singular_vector(acts);
    let (h, w) = acts.spatial();
    let mut acc = vec![0.0f64; h * w];
    for (k, &vk) in v.iter().enumerate() {
        for (s, &a) in acc.iter_mut().zip(acts.channel(k)) {
            *s += vk * a as f64;
        }
    }
    if acc.iter().sum::<f64>() < 0.0 {
        acc.iter_mut().for_each(|x| *x = -*x);
    }
    acc
}

pub fn grad_cam(
    acts: &LayerActivations,
    grads: &LayerGradients,
    input_hw: (usize, usize),
) -> Result<SaliencyMap> {
    finish(grad_cam_plane(acts, grads)?, acts.spatial(), input_hw)
}

pub fn xgrad_cam(
    acts: &LayerActivations,
    grads: &LayerGradients,
    input_hw: (usize, usize),
) -> Result<SaliencyMap> {
    finish(xgrad_cam_plane(acts, grads)?, acts.spatial(), input_hw)
}

pub fn layer_cam(
    acts: &LayerActivations,
    grads: &LayerGradients,
    input_hw: (usize, usize),
) -> Result<SaliencyMap> {
    finish(layer_cam_plane(acts, grads)?, acts.spatial(), input_hw)
}

pub fn eigen_cam(acts: &LayerActivations, input_hw: (usize, usize)) -> Result<SaliencyMap> {
    finish(eigen_cam_plane(acts), acts.spatial(), input_hw)
}

/// Score-CAM for `input`, whose trailing two dims set the output size.
pub fn score_cam(
    acts: &LayerActivations,
    input: &Tensor,
    class_idx: usize,
    source: ScoreSource<'_>,
) -> Result<SaliencyMap> {
    let scores = score_cam_scores(acts, input, class_idx, source)?;
    finish(score_cam_plane(acts, &scores)?, acts.spatial(), input.spatial()?)
}

/// Everything a method might need for one sample.
#[derive(Clone, Copy)]
pub struct CamInputs<'a> {
    pub acts: &'a LayerActivations,
    pub grads: Option<&'a LayerGradients>,
    pub input: &'a Tensor,
    pub class_idx: usize,
    pub scores: Option<ScoreSource<'a>>,
}

/// Dispatches to the requested method.
pub fn compute(method: CamMethod, inputs: CamInputs<'_>) -> Result<SaliencyMap> {
    let hw = inputs.input.spatial()?;
    let grads = || {
        inputs.grads.ok_or_else(|| {
            Error::Config(format!("{method} needs gradients but none are available"))
        })
    };
    match method {
        CamMethod::GradCam => grad_cam(inputs.acts, grads()?, hw),
        CamMethod::XGradCam => xgrad_cam(inputs.acts, grads()?, hw),
        CamMethod::LayerCam => layer_cam(inputs.acts, grads()?, hw),
        CamMethod::EigenCam => eigen_cam(inputs.acts, hw),
        CamMethod::ScoreCam => {
            let source = inputs.scores.ok_or_else(|| {
                Error::Config("score-cam needs a model oracle or a precomputed score table".into())
            })?;
            score_cam(inputs.acts, inputs.input, inputs.class_idx, source)
        }
    }
}
