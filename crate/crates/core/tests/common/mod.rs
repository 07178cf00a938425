//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Γ((ν+1)/2) / Γ(ν/2) for integer ν via Γ(x+1) = xΓ(x) from Γ(1/2) and Γ(1).
pub fn gamma_ratio(df: u32) -> f64 {
    fn gamma_half(twice: u32) -> f64 {
        // Γ(twice/2)
        let (mut x, mut g) = if twice % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
        while 2.0 * x < twice as f64 {
            g *= x;
            x += 1.0;
        }
        g
    }
    gamma_half(df + 1) / gamma_half(df)
}

pub fn t_density(x: f64, df: u32) -> f64 {
    let v = df as f64;
    gamma_ratio(df) / (v * PI).sqrt() * (1.0 + x * x / v).powf(-(v + 1.0) / 2.0)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f((a + b) / 2.0) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, left, eps / 2.0, depth - 1) + adaptive(f, m, b, right, eps / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    adaptive(f, a, b, simpson(f, a, b), eps, 50)
}

/// Two-sided Student-t p-value by numerical integration of the density.
pub fn t_two_sided_p(t: f64, df: u32) -> f64 {
    let area = integrate(&|x| t_density(x, df), 0.0, t.abs(), 1e-14);
    (1.0 - 2.0 * area).max(0.0)
}

/// Pair counting with ties worth one half, kept as `2·wins + ties`.
pub fn auroc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut twice, mut pos, mut neg) = (0u64, 0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            pos += 1;
        } else {
            neg += 1;
        }
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / 2.0 / (pos * neg) as f64
}

/// Average precision with ties ranked by original index: the mean over
/// positives of the precision at each positive's rank.
pub fn average_precision_steps(scores: &[f64], labels: &[bool]) -> f64 {
    let n = scores.len();
    let mut total = 0.0;
    let mut positives = 0;
    for i in (0..n).filter(|&i| labels[i]) {
        positives += 1;
        let ahead = |j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
        let rank = (0..n).filter(|&j| ahead(j)).count();
        let hits = (0..n).filter(|&j| labels[j] && ahead(j)).count();
        total += hits as f64 / rank as f64;
    }
    total / positives as f64
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Quadratic-time average ranks.
pub fn naive_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let below = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// (r, two-sided p) for a correlation coefficient on `n` points.
pub fn correlation_with_p(r: f64, n: usize) -> (f64, f64) {
    let df = (n - 2) as u32;
    let t = r * (df as f64 / (1.0 - r * r)).sqrt();
    (r, t_two_sided_p(t, df))
}

/// Leading left singular direction of `M` (`rows × cols`, row-major) by power
/// iteration on `M·Mᵀ`, returned as `M·v` up to scale with a non-negative sum.
pub fn eigen_map_oracle(m: &[f64], rows: usize, cols: usize, iters: usize) -> Vec<f64> {
    let mut mmt = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in 0..rows {
            mmt[i * rows + j] = (0..cols).map(|k| m[i * cols + k] * m[j * cols + k]).sum();
        }
    }
    let mut u: Vec<f64> = (0..rows).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    for _ in 0..iters {
        let mut next: Vec<f64> = (0..rows)
            .map(|i| (0..rows).map(|j| mmt[i * rows + j] * u[j]).sum())
            .collect();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        next.iter_mut().for_each(|x| *x /= norm);
        let diff: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).sum();
        u = next;
        if diff < 1e-10 {
            break;
        }
    }
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u
}

/// Min-max normalization of ReLU(v), zeros when constant.
pub fn relu_minmax(v: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return vec![0.0; r.len()];
    }
    r.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

pub struct GradCheck {
    pub checked: usize,
    /// Coordinates whose ±ε probes straddle a ReLU or max-pool switch.
    pub skipped: usize,
    pub max_rel_err: f64,
}

impl GradCheck {
    fn record(&mut self, analytic: f64, f: &dyn Fn(f64) -> f64, eps: f64) -> bool {
        let (fp, f0, fm) = (f(eps), f(0.0), f(-eps));
        let fwd = (fp - f0) / eps;
        let bwd = (f0 - fm) / eps;
        // The network is piecewise linear in any single coordinate, so the two
        // one-sided slopes agree unless a kink lies inside the probe.
        if (fwd - bwd).abs() > 1e-6 * (fwd.abs() + bwd.abs()) + 1e-9 {
            self.skipped += 1;
            return false;
        }
        let numeric = (fp - fm) / (2.0 * eps);
        let scale = analytic.abs().max(numeric.abs());
        let rel = if scale < 1e-9 { 0.0 } else { (analytic - numeric).abs() / scale };
        self.max_rel_err = self.max_rel_err.max(rel);
        self.checked += 1;
        true
    }
}

/// Central-difference check (ε = 1e-3) of the logit gradients on `coords`
/// random parameter coordinates and `coords` random explanation-layer
/// coordinates of a freshly initialized model on an 8×8 input.
pub fn gradient_check(seed: u64, coords: usize) -> GradCheck {
    use camalign::cam::LayerActivations;
    use camalign::minicnn::MiniCnnModel;
    use camalign::tensor::Tensor;
    use rand::Rng;

    let eps = 1e-3;
    let mut r = camalign::rng::seeded(seed);
    let mut out = GradCheck { checked: 0, skipped: 0, max_rel_err: 0.0 };
    let model = MiniCnnModel::init(seed);
    let image = Tensor::new(vec![1, 8, 8], (0..64).map(|_| r.random::<f32>()).collect()).unwrap();

    let mut param_checked = 0;
    while param_checked < coords {
        let class = r.random_range(0..2);
        let mut d = [0.0; 2];
        d[class] = 1.0;
        let grads = model.parameter_gradients(&image, d).unwrap();
        let t = r.random_range(0..6);
        let i = r.random_range(0..grads.tensors()[t].len());
        let analytic = grads.tensors()[t][i];
        let f = |delta: f64| {
            let mut m = model.clone();
            m.params_mut().tensors_mut()[t][i] += delta;
            m.logits(&image).unwrap()[class]
        };
        if out.record(analytic, &f, eps) {
            param_checked += 1;
        }
    }

    let (_, acts) = model.forward(&image).unwrap();
    let mut act_checked = 0;
    while act_checked < coords {
        let class = r.random_range(0..2);
        let g = model.backward_to_activations(&image, class).unwrap();
        let i = r.random_range(0..acts.maps().len());
        let analytic = g.maps().data()[i] as f64;
        let f = |delta: f64| {
            let mut t = acts.maps().clone();
            t.data_mut()[i] = (t.data()[i] as f64 + delta) as f32;
            let shift = t.data()[i] as f64 - acts.maps().data()[i] as f64;
            // Rescale so f32 rounding of the probe does not bias the slope.
            let l = model
                .logits_from_activations(&LayerActivations::new(t).unwrap())
                .unwrap()[class];
            let base = model.logits_from_activations(&acts).unwrap()[class];
            if shift == 0.0 { base } else { base + (l - base) * delta / shift }
        };
        if out.record(analytic, &f, eps) {
            act_checked += 1;
        }
    }
    out
}
