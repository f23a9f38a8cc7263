//! Spherical operators on five-component signals.
//!
//! Each component is padded from its western (and, for convolution, eastern)
//! neighbour, after which hexagonal convolution, pooling and up-sampling are
//! plain dense operators. Padding writes literal zeros at the four corner
//! cells that would hold a pole or an off-lattice point.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::{AlphaMaps, COMPONENTS};
use crate::tensor::{self, gemm_acc, PoolMode, Tensor};
use crate::{shape_err, Error, Result};

/// A `C`-channel signal on the non-pole vertices of a level-`r` mesh, stored
/// as five `C x 2W x W` components.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTensor {
    level: u32,
    channels: usize,
    comps: Vec<Tensor>,
}

impl SphereTensor {
    pub fn new(level: u32, comps: Vec<Tensor>) -> Result<Self> {
        if comps.len() != COMPONENTS {
            return Err(shape_err!("expected 5 components, got {}", comps.len()));
        }
        let w = 1usize << level;
        let channels = comps[0].dims3()?.0;
        for c in &comps {
            if c.shape() != [channels, 2 * w, w] {
                return Err(shape_err!(
                    "component shape {:?} does not match level {level} ({channels} x {} x {w})",
                    c.shape(),
                    2 * w
                ));
            }
        }
        Ok(Self { level, channels, comps })
    }

    pub fn zeros(level: u32, channels: usize) -> Self {
        Self::full(level, channels, 0.0)
    }

    pub fn full(level: u32, channels: usize, value: f32) -> Self {
        let w = 1usize << level;
        Self { level, channels, comps: (0..COMPONENTS).map(|_| Tensor::full(&[channels, 2 * w, w], value)).collect() }
    }

    /// Builds each value from `(component, channel, row, col)`.
    pub fn from_fn(level: u32, channels: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f32) -> Self {
        let w = 1usize << level;
        let comps = (0..COMPONENTS)
            .map(|k| {
                Tensor::from_fn(&[channels, 2 * w, w], |i| {
                    let (c, row, col) = (i / (2 * w * w), (i / w) % (2 * w), i % w);
                    f(k, c, row, col)
                })
            })
            .collect();
        Self { level, channels, comps }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn width(&self) -> usize {
        1 << self.level
    }

    pub fn component(&self, k: usize) -> &Tensor {
        &self.comps[k]
    }

    pub fn components(&self) -> &[Tensor] {
        &self.comps
    }

    /// Mutable components; callers must keep every shape unchanged.
    pub(crate) fn components_mut(&mut self) -> &mut [Tensor] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Tensor> {
        self.comps
    }

    pub fn get(&self, comp: usize, channel: usize, row: usize, col: usize) -> f32 {
        self.comps[comp].at3(channel, row, col)
    }

    /// Applies `f` to every component.
    pub fn map(&self, mut f: impl FnMut(&Tensor) -> Result<Tensor>) -> Result<Self> {
        let comps = self.comps.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(self.level, comps)
    }

    pub fn map_inplace(&mut self, mut f: impl FnMut(&mut Tensor)) {
        self.comps.iter_mut().for_each(&mut f);
    }

    /// Moves component `i` to position `i + shift (mod 5)`: a rotation by
    /// `shift * 72` degrees about the polar axis.
    pub fn rotate_components(&self, shift: usize) -> Self {
        let mut comps = self.comps.clone();
        comps.rotate_right(shift % COMPONENTS);
        Self { level: self.level, channels: self.channels, comps }
    }

    pub fn concat_channels(&self, other: &SphereTensor) -> Result<Self> {
        self.check_level(other.level)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| tensor::concat_channels(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.level, comps)
    }

    pub fn add(&self, other: &SphereTensor) -> Result<Self> {
        self.check_level(other.level)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| tensor::add(a, b)).collect::<Result<Vec<_>>>()?;
        Self::new(self.level, comps)
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(Tensor::all_finite)
    }

    pub fn max_abs(&self) -> f32 {
        self.comps.iter().flat_map(|c| c.data()).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SphereTensor) -> f32 {
        self.comps.iter().zip(&other.comps).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    fn check_level(&self, level: u32) -> Result<()> {
        if self.level != level {
            return Err(Error::LevelMismatch { expected: self.level, found: level });
        }
        Ok(())
    }
}

/// Seven-tap hexagonal filters `w1..w7` (`w7` is the centre) for every
/// output/input channel pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HexKernelBank {
    c_out: usize,
    c_in: usize,
    weights: Vec<f32>,
    bias: Option<Vec<f32>>,
}

impl HexKernelBank {
    /// `weights` is `c_out x c_in x 7`.
    pub fn new(c_out: usize, c_in: usize, weights: Vec<f32>, bias: Option<Vec<f32>>) -> Result<Self> {
        if weights.len() != c_out * c_in * 7 {
            return Err(shape_err!(
                "hex bank {c_out}x{c_in} needs {} weights, got {}",
                c_out * c_in * 7,
                weights.len()
            ));
        }
        if let Some(b) = &bias {
            if b.len() != c_out {
                return Err(shape_err!("hex bias has {} entries for {c_out} outputs", b.len()));
            }
        }
        Ok(Self { c_out, c_in, weights, bias })
    }

    /// Bank with the same taps for every channel pair.
    pub fn uniform(c_out: usize, c_in: usize, taps: [f32; 7]) -> Self {
        let weights = (0..c_out * c_in).flat_map(|_| taps).collect();
        Self { c_out, c_in, weights, bias: None }
    }

    pub fn c_out(&self) -> usize {
        self.c_out
    }

    pub fn c_in(&self) -> usize {
        self.c_in
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> Option<&[f32]> {
        self.bias.as_deref()
    }

    pub fn taps(&self, o: usize, c: usize) -> [f32; 7] {
        let i = (o * self.c_in + c) * 7;
        self.weights[i..i + 7].try_into().expect("seven taps")
    }

    /// The two masked 3x3 kernels, row-major:
    /// `W1 = [w2 w1 0; w3 w7 w6; 0 w4 w5]`, `W2 = [w3 w2 0; w4 w7 w1; 0 w5 w6]`.
    pub fn masks(&self, o: usize, c: usize) -> ([f32; 9], [f32; 9]) {
        let [w1, w2, w3, w4, w5, w6, w7] = self.taps(o, c);
        ([w2, w1, 0.0, w3, w7, w6, 0.0, w4, w5], [w3, w2, 0.0, w4, w7, w1, 0.0, w5, w6])
    }

    /// Both masks as `C_out x C_in x 3 x 3` kernels.
    pub fn mask_kernels(&self) -> (Tensor, Tensor) {
        let mut k1 = Tensor::zeros(&[self.c_out, self.c_in, 3, 3]);
        let mut k2 = Tensor::zeros(&[self.c_out, self.c_in, 3, 3]);
        for o in 0..self.c_out {
            for c in 0..self.c_in {
                let (m1, m2) = self.masks(o, c);
                let i = (o * self.c_in + c) * 9;
                k1.data_mut()[i..i + 9].copy_from_slice(&m1);
                k2.data_mut()[i..i + 9].copy_from_slice(&m2);
            }
        }
        (k1, k2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadMode {
    /// All four sides: `C x (2W+2) x (W+2)`.
    Full,
    /// Top row and left column only: `C x (2W+1) x (W+1)`.
    West,
}

/// Pads every component from its neighbours.
///
/// With `C_w`/`C_e` the western/eastern components and 0-based indices:
///
/// ```text
/// top     P[0][p]        = C_w[W-1-p][W-1]    p < W,   P[0][W] = 0
/// left    P[1+q][0]      = C_w[W+q][W-1]      q < W
///         P[1+q][0]      = C_w[2W-1][2W-2-q]  W <= q < 2W-1,  P[2W][0] = 0
/// bottom  P[2W+1][1+m]   = C_e[2W-1-m][0]     m < W,   P[2W+1][0] = 0
/// right   P[1+m][W+1]    = C_e[0][W-1-m]      m < W,   P[0][W+1] = 0
///         P[W+1+m][W+1]  = C_e[m][0]          m <= W
/// ```
///
/// The top and left zeros sit on the north and south poles; the right
/// column repeats `C_e[0][0]` for the valence-5 vertex at the gore corner.
pub fn pad(t: &SphereTensor, mode: PadMode) -> Vec<Tensor> {
    let (w, ch) = (t.width(), t.channels);
    let (ph, pw) = match mode {
        PadMode::Full => (2 * w + 2, w + 2),
        PadMode::West => (2 * w + 1, w + 1),
    };
    (0..COMPONENTS)
        .map(|i| {
            let ci = &t.comps[i];
            let cw = &t.comps[(i + COMPONENTS - 1) % COMPONENTS];
            let ce = &t.comps[(i + 1) % COMPONENTS];
            let mut p = Tensor::zeros(&[ch, ph, pw]);
            for c in 0..ch {
                let (src, west, east) = (ci.channel(c), cw.channel(c), ce.channel(c));
                let at = |g: &[f32], r: usize, col: usize| g[r * w + col];
                let dst = p.channel_mut(c);
                for q in 0..w {
                    dst[q] = at(west, w - 1 - q, w - 1);
                    dst[(1 + q) * pw] = at(west, w + q, w - 1);
                }
                for q in w..2 * w - 1 {
                    dst[(1 + q) * pw] = at(west, 2 * w - 1, 2 * w - 2 - q);
                }
                for r in 0..2 * w {
                    dst[(1 + r) * pw + 1..(1 + r) * pw + 1 + w].copy_from_slice(&src[r * w..(r + 1) * w]);
                }
                if mode == PadMode::Full {
                    for m in 0..w {
                        dst[(2 * w + 1) * pw + 1 + m] = at(east, 2 * w - 1 - m, 0);
                        dst[(1 + m) * pw + w + 1] = at(east, 0, w - 1 - m);
                    }
                    for m in 0..=w {
                        dst[(w + 1 + m) * pw + w + 1] = at(east, m, 0);
                    }
                }
            }
            p
        })
        .collect()
}

/// Whether the 3x3 window of stored cell `(row, col)` on the fully padded
/// grid covers one of the four zero corners of [`pad`]. Such outputs mix in
/// a zero where the mesh has a pole or no vertex at all.
pub fn touches_zero_corner(width: usize, row: usize, col: usize) -> bool {
    let w = width;
    [(0, w), (0, w + 1), (2 * w, 0), (2 * w + 1, 0)]
        .iter()
        .any(|&(pr, pc)| (row..row + 3).contains(&pr) && (col..col + 3).contains(&pc))
}

fn check_alphas(t: &SphereTensor, alphas: &AlphaMaps) -> Result<()> {
    if alphas.level() != t.level {
        return Err(Error::LevelMismatch { expected: t.level, found: alphas.level() });
    }
    Ok(())
}

fn check_bank(t: &SphereTensor, bank: &HexKernelBank) -> Result<()> {
    if bank.c_in != t.channels {
        return Err(shape_err!("hex bank expects {} input channels, signal has {}", bank.c_in, t.channels));
    }
    Ok(())
}

/// Padded-window offsets `(dy, dx)` of the neighbour slots `n1..n6` and the
/// centre, relative to the window's top-left corner.
const SLOT_WINDOW: [(usize, usize); 7] = [(0, 1), (0, 0), (1, 0), (2, 1), (2, 2), (1, 2), (1, 1)];

/// Upper bound on the im2col buffer, in floats.
const COLS_BUDGET: usize = 1 << 22;

/// North-aligned hexagonal convolution.
///
/// Evaluates `F = A * conv(P, W1) + (1 - A) * conv(P, W2) + bias` on the
/// fully padded components. Since both masks place tap `w_j` on neighbours
/// `n_j` and `n_{j-1}` respectively, this is computed as a single product of
/// the `C_out x 7 C_in` weight matrix with the seven blended neighbour
/// planes `A * x(n_j) + (1 - A) * x(n_{j-1})` of each input channel.
pub fn hexconv(t: &SphereTensor, bank: &HexKernelBank, alphas: &AlphaMaps) -> Result<SphereTensor> {
    check_alphas(t, alphas)?;
    check_bank(t, bank)?;
    let (w, h) = (t.width(), 2 * t.width());
    let pw = w + 2;
    let c_in = t.channels;
    let k = 7 * c_in;
    let rows_per_block = (COLS_BUDGET / (k * w)).clamp(1, h);
    let padded = pad(t, PadMode::Full);

    let comps = padded
        .iter()
        .enumerate()
        .map(|(comp, p)| {
            let alpha = alphas.component_f32(comp);
            let mut out = Tensor::zeros(&[bank.c_out, h, w]);
            let mut cols = vec![0f32; k * rows_per_block * w];
            let mut acc = vec![0f32; bank.c_out * rows_per_block * w];
            let mut r0 = 0;
            while r0 < h {
                let r1 = (r0 + rows_per_block).min(h);
                let n = (r1 - r0) * w;
                for c in 0..c_in {
                    let src = p.channel(c);
                    for j in 0..7 {
                        let dst = &mut cols[(c * 7 + j) * n..(c * 7 + j + 1) * n];
                        let (dy, dx) = SLOT_WINDOW[j];
                        let (py, px) = SLOT_WINDOW[(j + 5) % 6];
                        for r in r0..r1 {
                            let a = &alpha[r * w..(r + 1) * w];
                            let d = &mut dst[(r - r0) * w..(r - r0 + 1) * w];
                            let cur = &src[(r + dy) * pw + dx..(r + dy) * pw + dx + w];
                            if j == 6 {
                                d.copy_from_slice(cur);
                                continue;
                            }
                            let prev = &src[(r + py) * pw + px..(r + py) * pw + px + w];
                            for x in 0..w {
                                d[x] = a[x] * cur[x] + (1.0 - a[x]) * prev[x];
                            }
                        }
                    }
                }
                let acc = &mut acc[..bank.c_out * n];
                acc.fill(0.0);
                gemm_acc(&bank.weights, &cols[..k * n], acc, bank.c_out, k, n);
                for o in 0..bank.c_out {
                    let b = bank.bias.as_ref().map_or(0.0, |b| b[o]);
                    let dst = &mut out.channel_mut(o)[r0 * w..r1 * w];
                    for (d, &v) in dst.iter_mut().zip(&acc[o * n..(o + 1) * n]) {
                        *d = v + b;
                    }
                }
                r0 = r1;
            }
            out
        })
        .collect();
    SphereTensor::new(t.level, comps)
}

/// Hexagonal convolution evaluated literally as two masked dense
/// convolutions followed by the per-cell blend. Slower than [`hexconv`];
/// the two agree up to float rounding.
pub fn hexconv_two_pass(t: &SphereTensor, bank: &HexKernelBank, alphas: &AlphaMaps) -> Result<SphereTensor> {
    check_alphas(t, alphas)?;
    check_bank(t, bank)?;
    let (k1, k2) = bank.mask_kernels();
    let comps = pad(t, PadMode::Full)
        .iter()
        .enumerate()
        .map(|(comp, p)| {
            let f1 = tensor::conv2d_valid(p, &k1, None)?;
            let f2 = tensor::conv2d_valid(p, &k2, None)?;
            let alpha = alphas.component_f32(comp);
            let mut out = f1;
            for o in 0..bank.c_out {
                let b = bank.bias.as_ref().map_or(0.0, |b| b[o]);
                let (d, s) = (out.channel_mut(o), f2.channel(o));
                for i in 0..d.len() {
                    d[i] = alpha[i] * d[i] + (1.0 - alpha[i]) * s[i] + b;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    SphereTensor::new(t.level, comps)
}

/// Halves the resolution. Each coarse cell reduces the fine vertex at its
/// own position together with neighbours `n1, n2, n3`; those four cells form
/// an aligned 2x2 block of the unpadded component, so the western padding
/// never enters a window.
pub fn sphere_pool(t: &SphereTensor, mode: PoolMode) -> Result<SphereTensor> {
    if t.level == 0 {
        return Err(shape_err!("cannot pool a level-0 signal"));
    }
    let comps = t.comps.iter().map(|c| tensor::pool2x2(c, mode)).collect::<Result<Vec<_>>>()?;
    SphereTensor::new(t.level - 1, comps)
}

/// Mean of the five ring values around a pole, independent of their order
/// (so it commutes with gore rotation) and exact for equal values.
fn ring_mean(mut v: [f32; 5]) -> f32 {
    v.sort_unstable_by(f32::total_cmp);
    v[0] + v.iter().map(|x| x - v[0]).sum::<f32>() / 5.0
}

/// Per-channel estimates `(north, south)` of the pole values: the mean of
/// the pole's five neighbours, cells `(0, W-1)` and `(2W-1, 0)` of every
/// component.
pub fn pole_values(t: &SphereTensor) -> (Vec<f32>, Vec<f32>) {
    let w = t.width();
    (0..t.channels)
        .map(|c| {
            let north = core::array::from_fn(|k| t.get(k, c, 0, w - 1));
            let south = core::array::from_fn(|k| t.get(k, c, 2 * w - 1, 0));
            (ring_mean(north), ring_mean(south))
        })
        .unzip()
}

/// Doubles the resolution: west-pad, bilinear 2x up-sampling, then one cell
/// cropped from every side. The interpolation is corner aligned, so fine
/// cells on even lattice points reproduce their coarse vertex exactly. The
/// two pad cells on the poles hold [`pole_values`] instead of zero, so the
/// fine cells next to a pole interpolate from a pole estimate.
pub fn sphere_upsample(t: &SphereTensor) -> Result<SphereTensor> {
    if t.level >= crate::mesh::MAX_LEVEL {
        return Err(Error::LevelOutOfRange { level: t.level + 1, max: crate::mesh::MAX_LEVEL });
    }
    let (w, w2) = (t.width(), 2 * t.width());
    let (north, south) = pole_values(t);
    let mut padded = pad(t, PadMode::West);
    for p in &mut padded {
        for c in 0..t.channels {
            let d = p.channel_mut(c);
            d[w] = north[c];
            d[2 * w * (w + 1)] = south[c];
        }
    }
    let comps = padded
        .iter()
        .map(|p| {
            let u = tensor::upsample2x_bilinear_corner(p)?;
            let (ch, uh, uw) = u.dims3()?;
            let mut out = Tensor::zeros(&[ch, 2 * w2, w2]);
            for c in 0..ch {
                let (s, d) = (u.channel(c), out.channel_mut(c));
                for r in 0..2 * w2 {
                    debug_assert!(r + 2 < uh + 1 && w2 + 2 == uw);
                    d[r * w2..(r + 1) * w2].copy_from_slice(&s[(r + 1) * uw + 1..(r + 1) * uw + 1 + w2]);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    SphereTensor::new(t.level + 1, comps)
}

/// 1x1 convolution on every component; `weights` is `C_out x C_in`.
pub fn pointwise_conv(t: &SphereTensor, weights: &Tensor, bias: Option<&Tensor>) -> Result<SphereTensor> {
    t.map(|c| tensor::conv1x1(c, weights, bias))
}

/// Resolution-raising layer: [`sphere_upsample`] then [`pointwise_conv`].
pub fn hexconv_transpose(t: &SphereTensor, weights: &Tensor, bias: Option<&Tensor>) -> Result<SphereTensor> {
    pointwise_conv(&sphere_upsample(t)?, weights, bias)
}
