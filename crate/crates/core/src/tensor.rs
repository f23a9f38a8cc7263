//! Dense `f32` tensors and the primitive operators used by the sphere layer.
//!
//! Feature maps are channels-first, `C x H x W`, row-major. No operator pads
//! implicitly; seam padding lives in [`crate::sphere`].

use alloc::vec;
use alloc::vec::Vec;

use crate::{shape_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(shape_err!("shape {shape:?} needs {n} values, got {}", data.len()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f32) -> Self {
        Self { shape: shape.to_vec(), data: vec![value; shape.iter().product()] }
    }

    pub fn from_fn(shape: &[usize], f: impl FnMut(usize) -> f32) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), data: (0..n).map(f).collect() }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(C, H, W)` of a rank-3 tensor.
    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match *self.shape.as_slice() {
            [c, h, w] => Ok((c, h, w)),
            ref s => Err(shape_err!("expected C x H x W, got {s:?}")),
        }
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(shape_err!("cannot reshape {:?} to {shape:?}", self.shape));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Plane `c` of a rank-3 tensor.
    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = self.shape[1..].iter().product::<usize>();
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let plane = self.shape[1..].iter().product::<usize>();
        &mut self.data[c * plane..(c + 1) * plane]
    }

    pub fn at3(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.shape[1] + y) * self.shape[2] + x]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f32 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    Max,
    Average,
}

#[inline]
pub(crate) fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out (m x n) += a (m x k) * b (k x n)`, all row-major.
pub(crate) fn gemm_acc(a: &[f32], b: &[f32], out: &mut [f32], m: usize, k: usize, n: usize) {
    debug_assert!(a.len() == m * k && b.len() == k * n && out.len() == m * n);
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for (p, &aip) in a[i * k..(i + 1) * k].iter().enumerate() {
            if aip != 0.0 {
                axpy(aip, &b[p * n..(p + 1) * n], row);
            }
        }
    }
}

fn check_bias(bias: Option<&Tensor>, c_out: usize) -> Result<()> {
    match bias {
        Some(b) if b.len() != c_out => Err(shape_err!("bias has {} entries for {c_out} channels", b.len())),
        _ => Ok(()),
    }
}

fn add_bias(out: &mut Tensor, bias: Option<&Tensor>) {
    if let Some(b) = bias {
        for (c, &bc) in b.data.iter().enumerate() {
            out.channel_mut(c).iter_mut().for_each(|x| *x += bc);
        }
    }
}

/// Cross-correlation with a `C_out x C_in x 3 x 3` kernel, stride 1, no
/// padding. Zero taps are skipped, so masked kernels cost only their
/// non-zero entries.
pub fn conv2d_valid(input: &Tensor, kernel: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    let (c_in, h, w) = input.dims3()?;
    let (c_out, kc, kh, kw) = match *kernel.shape() {
        [o, i, 3, 3] => (o, i, 3, 3),
        ref s => return Err(shape_err!("kernel must be C_out x C_in x 3 x 3, got {s:?}")),
    };
    if kc != c_in {
        return Err(shape_err!("kernel expects {kc} input channels, input has {c_in}"));
    }
    if h < kh || w < kw {
        return Err(shape_err!("input {h}x{w} smaller than 3x3 kernel"));
    }
    check_bias(bias, c_out)?;
    let (oh, ow) = (h - 2, w - 2);
    let mut out = Tensor::zeros(&[c_out, oh, ow]);
    for o in 0..c_out {
        let plane = &mut out.data[o * oh * ow..(o + 1) * oh * ow];
        for c in 0..c_in {
            let src = input.channel(c);
            let taps = &kernel.data[(o * c_in + c) * 9..(o * c_in + c + 1) * 9];
            for (t, &k) in taps.iter().enumerate() {
                if k == 0.0 {
                    continue;
                }
                let (dy, dx) = (t / 3, t % 3);
                for y in 0..oh {
                    let s = (y + dy) * w + dx;
                    axpy(k, &src[s..s + ow], &mut plane[y * ow..(y + 1) * ow]);
                }
            }
        }
    }
    add_bias(&mut out, bias);
    Ok(out)
}

/// Per-pixel linear map with a `C_out x C_in` weight matrix.
pub fn conv1x1(input: &Tensor, weights: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    let (c_in, h, w) = input.dims3()?;
    let c_out = match *weights.shape() {
        [o, i] if i == c_in => o,
        [o, i, 1, 1] if i == c_in => o,
        ref s => return Err(shape_err!("1x1 weights {s:?} incompatible with {c_in} input channels")),
    };
    check_bias(bias, c_out)?;
    let mut out = Tensor::zeros(&[c_out, h, w]);
    gemm_acc(&weights.data, &input.data, &mut out.data, c_out, c_in, h * w);
    add_bias(&mut out, bias);
    Ok(out)
}

/// Non-overlapping 2x2 windows, stride 2.
pub fn pool2x2(input: &Tensor, mode: PoolMode) -> Result<Tensor> {
    let (c, h, w) = input.dims3()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(shape_err!("pooling needs even spatial dims, got {h}x{w}"));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[c, oh, ow]);
    for ch in 0..c {
        let src = input.channel(ch);
        let dst = out.channel_mut(ch);
        for y in 0..oh {
            for x in 0..ow {
                let i = 2 * y * w + 2 * x;
                let q = [src[i], src[i + 1], src[i + w], src[i + w + 1]];
                dst[y * ow + x] = match mode {
                    PoolMode::Max => q[0].max(q[1]).max(q[2]).max(q[3]),
                    PoolMode::Average => (q[0] + q[1] + q[2] + q[3]) * 0.25,
                };
            }
        }
    }
    Ok(out)
}

/// Linear interpolation taps `(i0, i1, t)` for each output index.
fn taps(n_in: usize, n_out: usize, src: impl Fn(usize) -> f32) -> Vec<(usize, usize, f32)> {
    (0..n_out)
        .map(|k| {
            let s = src(k).clamp(0.0, (n_in - 1) as f32);
            let i0 = s as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, s - i0 as f32)
        })
        .collect()
}

fn upsample_with(input: &Tensor, src: impl Fn(usize) -> f32 + Copy) -> Result<Tensor> {
    let (c, h, w) = input.dims3()?;
    if h < 2 || w < 2 {
        return Err(shape_err!("up-sampling needs at least 2x2, got {h}x{w}"));
    }
    let (ty, tx) = (taps(h, 2 * h, src), taps(w, 2 * w, src));
    let mut out = Tensor::zeros(&[c, 2 * h, 2 * w]);
    let mut row = vec![0f32; 2 * w];
    for ch in 0..c {
        let s = input.channel(ch);
        let d = out.channel_mut(ch);
        for (oy, &(y0, y1, fy)) in ty.iter().enumerate() {
            for (ox, &(x0, x1, fx)) in tx.iter().enumerate() {
                let top = s[y0 * w + x0] + fx * (s[y0 * w + x1] - s[y0 * w + x0]);
                let bot = s[y1 * w + x0] + fx * (s[y1 * w + x1] - s[y1 * w + x0]);
                row[ox] = top + fy * (bot - top);
            }
            d[oy * 2 * w..(oy + 1) * 2 * w].copy_from_slice(&row);
        }
    }
    Ok(out)
}

/// 2x bilinear up-sampling, half-pixel aligned: output sample `k` reads
/// source coordinate `(k + 0.5) / 2 - 0.5`, clamped to the input.
pub fn upsample2x_bilinear(input: &Tensor) -> Result<Tensor> {
    upsample_with(input, |k| (k as f32 + 0.5) * 0.5 - 0.5)
}

/// 2x bilinear up-sampling, corner aligned: output sample `k` reads source
/// coordinate `k / 2`, clamped. Even outputs copy input samples exactly.
pub fn upsample2x_bilinear_corner(input: &Tensor) -> Result<Tensor> {
    upsample_with(input, |k| k as f32 * 0.5)
}

pub const BN_EPS: f32 = 1e-5;

/// Inference batch-norm: `gamma * (x - mean) / sqrt(var + eps) + beta` per
/// channel.
pub fn batchnorm_inference(
    input: &Tensor,
    gamma: &[f32],
    beta: &[f32],
    mean: &[f32],
    var: &[f32],
    eps: f32,
) -> Result<Tensor> {
    let mut out = input.clone();
    batchnorm_inplace(&mut out, gamma, beta, mean, var, eps)?;
    Ok(out)
}

pub(crate) fn batchnorm_inplace(
    t: &mut Tensor,
    gamma: &[f32],
    beta: &[f32],
    mean: &[f32],
    var: &[f32],
    eps: f32,
) -> Result<()> {
    let c = t.shape.first().copied().unwrap_or(0);
    if [gamma.len(), beta.len(), mean.len(), var.len()].iter().any(|&n| n != c) {
        return Err(shape_err!("batch-norm parameters must have {c} entries"));
    }
    for ch in 0..c {
        let scale = gamma[ch] / libm::sqrtf(var[ch] + eps);
        let shift = beta[ch] - mean[ch] * scale;
        t.channel_mut(ch).iter_mut().for_each(|x| *x = *x * scale + shift);
    }
    Ok(())
}

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    relu_inplace(&mut out);
    out
}

pub fn relu_inplace(t: &mut Tensor) {
    t.data.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// `weights (C_out x C_in) * input + bias` on a flat vector.
pub fn dense(input: &[f32], weights: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    let (c_out, c_in) = match *weights.shape() {
        [o, i] => (o, i),
        ref s => return Err(shape_err!("dense weights must be 2-D, got {s:?}")),
    };
    if input.len() != c_in {
        return Err(shape_err!("dense layer expects {c_in} inputs, got {}", input.len()));
    }
    check_bias(bias, c_out)?;
    let data = (0..c_out)
        .map(|o| {
            let w = &weights.data[o * c_in..(o + 1) * c_in];
            let b = bias.map_or(0.0, |b| b.data[o]);
            w.iter().zip(input).fold(b, |s, (a, x)| s + a * x)
        })
        .collect();
    Tensor::new(vec![c_out], data)
}

/// Elementwise sum of two equally shaped tensors.
pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape != b.shape {
        return Err(shape_err!("cannot add {:?} and {:?}", a.shape, b.shape));
    }
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
    Tensor::new(a.shape.clone(), data)
}

/// Channel-wise concatenation `[a, b]` of two `C x H x W` tensors.
pub fn concat_channels(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let ((ca, ha, wa), (cb, hb, wb)) = (a.dims3()?, b.dims3()?);
    if (ha, wa) != (hb, wb) {
        return Err(shape_err!("cannot concatenate {ha}x{wa} with {hb}x{wb}"));
    }
    let mut data = Vec::with_capacity(a.len() + b.len());
    data.extend_from_slice(&a.data);
    data.extend_from_slice(&b.data);
    Tensor::new(vec![ca + cb, ha, wa], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lcg(seed: u64) -> impl FnMut(usize) -> f32 {
        let mut s = seed;
        move |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 40) as f32 / (1u64 << 24) as f32) * 2.0 - 1.0
        }
    }

    #[test]
    fn conv_center_tap_on_ones() {
        let x = Tensor::full(&[1, 3, 3], 1.0);
        let mut k = Tensor::zeros(&[1, 1, 3, 3]);
        k.data_mut()[4] = 1.0;
        let y = conv2d_valid(&x, &k, None).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[1.0]);
    }

    #[test]
    fn conv_constant_times_kernel_sum() {
        let x = Tensor::full(&[2, 6, 5], 1.5);
        let k = Tensor::from_fn(&[3, 2, 3, 3], lcg(3));
        let y = conv2d_valid(&x, &k, None).unwrap();
        for o in 0..3 {
            let s: f32 = k.data()[o * 18..(o + 1) * 18].iter().sum();
            for &v in y.channel(o) {
                assert!((v - 1.5 * s).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn conv_matches_nested_loops() {
        let x = Tensor::from_fn(&[2, 5, 5], lcg(1));
        let k = Tensor::from_fn(&[3, 2, 3, 3], lcg(2));
        let b = Tensor::from_fn(&[3], lcg(4));
        let y = conv2d_valid(&x, &k, Some(&b)).unwrap();
        for o in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = b.data()[o];
                    for c in 0..2 {
                        for u in 0..3 {
                            for v in 0..3 {
                                s += k.data()[((o * 2 + c) * 3 + u) * 3 + v] * x.at3(c, i + u, j + v);
                            }
                        }
                    }
                    assert!((y.at3(o, i, j) - s).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn conv_shape_errors() {
        let x = Tensor::zeros(&[2, 2, 5]);
        assert!(conv2d_valid(&x, &Tensor::zeros(&[1, 2, 3, 3]), None).is_err());
        let x = Tensor::zeros(&[2, 4, 4]);
        assert!(conv2d_valid(&x, &Tensor::zeros(&[1, 3, 3, 3]), None).is_err());
        assert!(conv2d_valid(&x, &Tensor::zeros(&[1, 2, 3, 3]), Some(&Tensor::zeros(&[2]))).is_err());
    }

    #[test]
    fn conv1x1_equals_conv_with_center_only_kernel() {
        let x = Tensor::from_fn(&[3, 4, 6], lcg(5));
        let w = Tensor::from_fn(&[2, 3], lcg(6));
        let y = conv1x1(&x, &w, None).unwrap();
        let mut k = Tensor::zeros(&[2, 3, 3, 3]);
        for o in 0..2 {
            for c in 0..3 {
                k.data_mut()[(o * 3 + c) * 9 + 4] = w.data()[o * 3 + c];
            }
        }
        let z = conv2d_valid(&x, &k, None).unwrap();
        for o in 0..2 {
            for i in 0..2 {
                for j in 0..4 {
                    assert!((y.at3(o, i + 1, j + 1) - z.at3(o, i, j)).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn pooling_arithmetic() {
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(pool2x2(&x, PoolMode::Max).unwrap().data(), &[4.0]);
        assert_eq!(pool2x2(&x, PoolMode::Average).unwrap().data(), &[2.5]);
        let c = Tensor::full(&[2, 4, 6], 0.7);
        for mode in [PoolMode::Max, PoolMode::Average] {
            let p = pool2x2(&c, mode).unwrap();
            assert_eq!(p.shape(), &[2, 2, 3]);
            assert!(p.data().iter().all(|&v| v == 0.7));
        }
        assert!(pool2x2(&Tensor::zeros(&[1, 3, 2]), PoolMode::Max).is_err());
    }

    #[test]
    fn pooling_block_constant_is_idempotent() {
        let coarse = Tensor::from_fn(&[1, 3, 2], lcg(8));
        let fine = Tensor::from_fn(&[1, 6, 4], |i| {
            let (y, x) = (i / 4, i % 4);
            coarse.at3(0, y / 2, x / 2)
        });
        assert_eq!(pool2x2(&fine, PoolMode::Max).unwrap(), coarse);
        assert_eq!(pool2x2(&fine, PoolMode::Average).unwrap(), coarse);
    }

    #[test]
    fn upsample_constant_and_ramp() {
        let c = Tensor::full(&[1, 3, 4], 2.0);
        let u = upsample2x_bilinear(&c).unwrap();
        assert_eq!(u.shape(), &[1, 6, 8]);
        assert!(u.data().iter().all(|&v| v == 2.0));
        assert_eq!(pool2x2(&u, PoolMode::Average).unwrap(), c);

        let ramp = Tensor::from_fn(&[1, 4, 4], |i| (i % 4) as f32 + 2.0 * (i / 4) as f32);
        let u = upsample2x_bilinear(&ramp).unwrap();
        for oy in 1..7 {
            for ox in 1..7 {
                let (sy, sx) = ((oy as f32 + 0.5) / 2.0 - 0.5, (ox as f32 + 0.5) / 2.0 - 0.5);
                assert!((u.at3(0, oy, ox) - (sx + 2.0 * sy)).abs() < 1e-6);
            }
        }
        assert!(upsample2x_bilinear(&Tensor::zeros(&[1, 1, 4])).is_err());
    }

    #[test]
    fn upsample_matches_pointwise_interpolation() {
        let x = Tensor::from_fn(&[1, 3, 3], lcg(9));
        let u = upsample2x_bilinear(&x).unwrap();
        let sample = |y: f32, x_: f32| {
            let (y, x_) = (y.clamp(0.0, 2.0), x_.clamp(0.0, 2.0));
            let (y0, x0) = (libm::floorf(y) as usize, libm::floorf(x_) as usize);
            let (y1, x1) = ((y0 + 1).min(2), (x0 + 1).min(2));
            let (fy, fx) = (y - y0 as f32, x_ - x0 as f32);
            (1.0 - fy) * ((1.0 - fx) * x.at3(0, y0, x0) + fx * x.at3(0, y0, x1))
                + fy * ((1.0 - fx) * x.at3(0, y1, x0) + fx * x.at3(0, y1, x1))
        };
        for oy in 0..6 {
            for ox in 0..6 {
                let e = sample((oy as f32 + 0.5) / 2.0 - 0.5, (ox as f32 + 0.5) / 2.0 - 0.5);
                assert!((u.at3(0, oy, ox) - e).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn corner_upsample_copies_even_samples() {
        let x = Tensor::from_fn(&[2, 3, 4], lcg(10));
        let u = upsample2x_bilinear_corner(&x).unwrap();
        for c in 0..2 {
            for y in 0..3 {
                for x_ in 0..4 {
                    assert_eq!(u.at3(c, 2 * y, 2 * x_), x.at3(c, y, x_));
                }
            }
            let mid = 0.5 * (x.at3(c, 0, 0) + x.at3(c, 0, 1));
            assert!((u.at3(c, 0, 1) - mid).abs() < 1e-6);
        }
    }

    #[test]
    fn batchnorm_relu_dense_basics() {
        let x = Tensor::from_fn(&[2, 3, 3], lcg(11));
        let y = batchnorm_inference(&x, &[1.0; 2], &[0.0; 2], &[0.0; 2], &[1.0; 2], BN_EPS).unwrap();
        assert!(x.max_abs_diff(&y) < 1e-5);
        assert!(batchnorm_inference(&x, &[1.0; 3], &[0.0; 2], &[0.0; 2], &[1.0; 2], BN_EPS).is_err());

        let r = relu(&Tensor::new(vec![3], vec![-2.0, 0.0, 3.0]).unwrap());
        assert_eq!(r.data(), &[0.0, 0.0, 3.0]);

        let eye = Tensor::from_fn(&[3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        assert_eq!(dense(&[1.0, -2.0, 0.5], &eye, None).unwrap().data(), &[1.0, -2.0, 0.5]);
        assert!(dense(&[1.0], &eye, None).is_err());
    }

    #[test]
    fn concat_and_add() {
        let a = Tensor::full(&[1, 2, 2], 1.0);
        let b = Tensor::full(&[2, 2, 2], 2.0);
        let c = concat_channels(&a, &b).unwrap();
        assert_eq!(c.shape(), &[3, 2, 2]);
        assert_eq!(c.channel(0), &[1.0; 4]);
        assert_eq!(c.channel(2), &[2.0; 4]);
        assert!(add(&a, &b).is_err());
        assert_eq!(add(&a, &a).unwrap().data(), &[2.0; 4]);
    }

    proptest! {
        #[test]
        fn conv_is_linear(seed in any::<u64>(), a in -2.0f32..2.0, b in -2.0f32..2.0) {
            let x = Tensor::from_fn(&[2, 6, 5], lcg(seed));
            let y = Tensor::from_fn(&[2, 6, 5], lcg(seed ^ 0xabcd));
            let k = Tensor::from_fn(&[3, 2, 3, 3], lcg(seed.wrapping_add(7)));
            let mix = Tensor::from_fn(&[2, 6, 5], |i| a * x.data()[i] + b * y.data()[i]);
            let lhs = conv2d_valid(&mix, &k, None).unwrap();
            let (cx, cy) = (conv2d_valid(&x, &k, None).unwrap(), conv2d_valid(&y, &k, None).unwrap());
            let rhs = Tensor::from_fn(lhs.shape(), |i| a * cx.data()[i] + b * cy.data()[i]);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-5);
        }

        #[test]
        fn resampling_preserves_channels(c in 1usize..4, h in 1usize..5, w in 1usize..5) {
            let x = Tensor::from_fn(&[c, 2 * h, 2 * w], lcg((c * 31 + h * 7 + w) as u64));
            prop_assert_eq!(pool2x2(&x, PoolMode::Max).unwrap().shape().to_vec(), vec![c, h, w]);
            prop_assert_eq!(upsample2x_bilinear(&x).unwrap().shape().to_vec(), vec![c, 4 * h, 4 * w]);
        }
    }
}
