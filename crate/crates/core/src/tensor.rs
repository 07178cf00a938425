//! Dense row-major `f32` tensors and the handful of image primitives the
//! saliency code needs: bilinear resizing, min-max normalization and ReLU.

use std::fmt;

use crate::error::{Error, Result};

/// Dense N-dimensional `f32` array stored row-major (last dimension fastest).
#[derive(Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("tensor needs at least one dimension".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Dimension(format!("zero extent in dims {dims:?}")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Dimension(format!("dims {dims:?} overflow")))?;
        if len != data.len() {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims.to_vec(), vec![0.0; len])
    }

    pub fn filled(dims: &[usize], value: f32) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims.to_vec(), vec![value; len])
    }

    /// Builds a 2-D tensor from equal-length rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(height * width);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        Self::new(vec![height, width], data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// `(height, width)` of a 2-D tensor.
    pub fn shape2(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            &[h, w] => Ok((h, w)),
            other => Err(Error::Dimension(format!("expected a 2-D tensor, got {other:?}"))),
        }
    }

    /// The trailing two extents, i.e. the spatial size of an image tensor
    /// laid out as `[..., H, W]`.
    pub fn spatial(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [.., h, w] => Ok((*h, *w)),
            other => Err(Error::Dimension(format!(
                "expected at least 2 dims for an image, got {other:?}"
            ))),
        }
    }

    pub fn reshape(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.data)
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let preview: Vec<f32> = self.data.iter().take(8).copied().collect();
        f.debug_struct("Tensor")
            .field("dims", &self.dims)
            .field("data", &preview)
            .field("len", &self.data.len())
            .finish()
    }
}

/// Pixel location: `w` is the column, `h` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelCoord {
    pub w: usize,
    pub h: usize,
}

// Corner-aligned source coordinate for destination index `d` on an axis of
// `dst` samples mapped from `src` samples.
fn source_coord(d: usize, src: usize, dst: usize) -> f64 {
    if dst == 1 {
        0.0
    } else {
        (d * (src - 1)) as f64 / (dst - 1) as f64
    }
}

fn axis_taps(d: usize, src: usize, dst: usize) -> (usize, usize, f64) {
    let c = source_coord(d, src, dst);
    let lo = (c.floor() as usize).min(src - 1);
    let hi = (lo + 1).min(src - 1);
    (lo, hi, c - lo as f64)
}

/// Corner-aligned bilinear resize of a 2-D tensor.
///
/// Destination index `d` on an axis with `D` samples reads source coordinate
/// `d·(S−1)/(D−1)` (or 0 when `D == 1`). Every output is a convex combination
/// of at most four source pixels and never leaves their range.
pub fn bilinear_resize(src: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    let (h, w) = src.shape2()?;
    if out_h == 0 || out_w == 0 {
        return Err(Error::Dimension(format!(
            "resize target {out_h}x{out_w} has a zero extent"
        )));
    }
    if (h, w) == (out_h, out_w) {
        return Ok(src.clone());
    }
    let data: Vec<f64> = src.data().iter().map(|&v| v as f64).collect();
    let out = resize_f64(&data, (h, w), (out_h, out_w));
    Tensor::new(vec![out_h, out_w], out.into_iter().map(|v| v as f32).collect())
}

/// The resize kernel on a row-major `f64` plane; callers validate extents.
pub(crate) fn resize_f64(s: &[f64], (h, w): (usize, usize), (out_h, out_w): (usize, usize)) -> Vec<f64> {
    if (h, w) == (out_h, out_w) {
        return s.to_vec();
    }
    let cols: Vec<(usize, usize, f64)> = (0..out_w).map(|x| axis_taps(x, w, out_w)).collect();
    let mut out = Vec::with_capacity(out_h * out_w);
    for y in 0..out_h {
        let (y0, y1, fy) = axis_taps(y, h, out_h);
        for &(x0, x1, fx) in &cols {
            let p00 = s[y0 * w + x0];
            let p01 = s[y0 * w + x1];
            let p10 = s[y1 * w + x0];
            let p11 = s[y1 * w + x1];
            let top = p00 + (p01 - p00) * fx;
            let bottom = p10 + (p11 - p10) * fx;
            let v = top + (bottom - top) * fy;
            let lo = p00.min(p01).min(p10).min(p11);
            let hi = p00.max(p01).max(p10).max(p11);
            out.push(v.clamp(lo, hi));
        }
    }
    out
}

/// In-place min-max normalization of an `f64` buffer; constant input becomes
/// all zeros.
pub(crate) fn minmax_f64(v: &mut [f64]) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    v.iter_mut().for_each(|x| *x = ((*x - lo) / range).clamp(0.0, 1.0));
}

/// `(t − min) / (max − min)`, or all zeros when the tensor is constant.
pub fn minmax_normalize(t: &Tensor) -> Tensor {
    let lo = t.min() as f64;
    let hi = t.max() as f64;
    let range = hi - lo;
    if !(range > 0.0) {
        return t.map(|_| 0.0);
    }
    t.map(|v| (((v as f64 - lo) / range) as f32).clamp(0.0, 1.0))
}

pub fn relu(t: &Tensor) -> Tensor {
    t.map(|v| v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(rows: &[&[f32]]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn tensor_rejects_bad_dims() {
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
        assert!(Tensor::new(vec![0, 3], vec![]).is_err());
    }

    #[test]
    fn resize_constant_field() {
        let out = bilinear_resize(&t2(&[&[7.0]]), 3, 3).unwrap();
        assert_eq!(out.dims(), &[3, 3]);
        assert!(out.data().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn resize_identity() {
        let src = t2(&[&[0.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(bilinear_resize(&src, 2, 2).unwrap(), src);
    }

    #[test]
    fn resize_corner_aligned_row() {
        let out = bilinear_resize(&t2(&[&[0.0, 1.0]]), 1, 4).unwrap();
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in out.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn resize_rejects_non_2d() {
        let t = Tensor::zeros(&[2, 2, 2]).unwrap();
        assert!(matches!(bilinear_resize(&t, 4, 4), Err(Error::Dimension(_))));
    }

    #[test]
    fn normalize_examples() {
        let out = minmax_normalize(&t2(&[&[0.0, 2.0], &[4.0, 8.0]]));
        assert_eq!(out.data(), &[0.0, 0.25, 0.5, 1.0]);
        let flat = minmax_normalize(&t2(&[&[5.0, 5.0]]));
        assert_eq!(flat.data(), &[0.0, 0.0]);
        let v = Tensor::new(vec![3], vec![-1.0, 0.0, 3.0]).unwrap();
        assert_eq!(minmax_normalize(&v).data(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn relu_examples() {
        let v = Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&v).data(), &[0.0, 0.0, 2.0]);
        let neg = Tensor::filled(&[2, 2], -3.0).unwrap();
        assert!(relu(&neg).data().iter().all(|&x| x == 0.0));
        let one = Tensor::new(vec![1], vec![3.5]).unwrap();
        assert_eq!(relu(&one).data(), &[3.5]);
    }
}
