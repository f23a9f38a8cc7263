use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{LayerKind, NetworkSpec, Stride, WeightStore};
use crate::mesh::{build_mesh, compute_alpha_maps};
use crate::sphere::{self, hexconv, pointwise_conv, sphere_pool, sphere_upsample};
use crate::tensor::{self, batchnorm_inplace, relu_inplace, PoolMode, BN_EPS};
use crate::{AlphaMaps, Error, HexKernelBank, Result, SphereTensor};

/// Blend-weight maps for every level a network touches.
#[derive(Debug, Clone, Default)]
pub struct AlphaSet {
    maps: BTreeMap<u32, AlphaMaps>,
}

impl AlphaSet {
    pub fn for_levels(levels: &[u32]) -> Result<Self> {
        let mut maps = BTreeMap::new();
        for &r in levels {
            maps.insert(r, compute_alpha_maps(&build_mesh(r)?)?);
        }
        Ok(Self { maps })
    }

    pub fn for_spec(spec: &NetworkSpec) -> Result<Self> {
        Self::for_levels(&spec.levels())
    }

    pub fn insert(&mut self, maps: AlphaMaps) {
        self.maps.insert(maps.level(), maps);
    }

    pub fn get(&self, level: u32) -> Result<&AlphaMaps> {
        self.maps.get(&level).ok_or(Error::LevelMismatch { expected: level, found: u32::MAX })
    }
}

/// Result of a layer or of a whole network.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Sphere(SphereTensor),
    /// A flat vector: pooled features or class logits.
    Logits(Vec<f32>),
}

impl Output {
    pub fn all_finite(&self) -> bool {
        match self {
            Output::Sphere(t) => t.all_finite(),
            Output::Logits(v) => v.iter().all(|x| x.is_finite()),
        }
    }

    pub fn into_sphere(self) -> Option<SphereTensor> {
        match self {
            Output::Sphere(t) => Some(t),
            Output::Logits(_) => None,
        }
    }

    pub fn into_logits(self) -> Option<Vec<f32>> {
        match self {
            Output::Logits(v) => Some(v),
            Output::Sphere(_) => None,
        }
    }
}

fn hex(x: &SphereTensor, w: &WeightStore, name: &str, alphas: &AlphaSet) -> Result<SphereTensor> {
    let weight = w.get(&format!("{name}.weight"))?;
    let bias = w.get(&format!("{name}.bias"))?;
    let &[c_out, c_in, 7] = weight.shape() else {
        return Err(crate::shape_err!("`{name}.weight` must be C_out x C_in x 7, got {:?}", weight.shape()));
    };
    let bank = HexKernelBank::new(c_out, c_in, weight.data().to_vec(), Some(bias.data().to_vec()))?;
    hexconv(x, &bank, alphas.get(x.level())?)
}

fn pw(x: &SphereTensor, w: &WeightStore, name: &str) -> Result<SphereTensor> {
    pointwise_conv(x, w.get(&format!("{name}.weight"))?, Some(w.get(&format!("{name}.bias"))?))
}

fn bn(mut x: SphereTensor, w: &WeightStore, name: &str) -> Result<SphereTensor> {
    let p = |s: &str| w.get(&format!("{name}.{s}")).map(|t| t.data());
    let (g, b, m, v) = (p("gamma")?, p("beta")?, p("mean")?, p("var")?);
    for c in x.components_mut() {
        batchnorm_inplace(c, g, b, m, v, BN_EPS)?;
    }
    Ok(x)
}

fn relu(mut x: SphereTensor) -> SphereTensor {
    x.map_inplace(relu_inplace);
    x
}

fn resample(x: SphereTensor, s: Stride) -> Result<SphereTensor> {
    match s {
        Stride::One => Ok(x),
        Stride::Down => sphere_pool(&x, PoolMode::Max),
        Stride::Up => sphere_upsample(&x),
    }
}

/// Bottleneck residual block:
/// `relu(BN(R(1x1 a->c)) + BN(1x1 b->c (relu(BN(hex b->b (relu(BN(R(1x1 a->b)))))))))`
/// where `R` pools (`s = 2`), up-samples (`s = 0.5`) or does nothing.
pub fn resblock_forward(
    x: &SphereTensor,
    w: &WeightStore,
    name: &str,
    s: Stride,
    alphas: &AlphaSet,
) -> Result<SphereTensor> {
    let n = |p: &str| format!("{name}.{p}");
    let short = bn(resample(pw(x, w, &n("shortcut"))?, s)?, w, &n("shortcut_bn"))?;
    let y = relu(bn(resample(pw(x, w, &n("conv1"))?, s)?, w, &n("bn1"))?);
    let y = relu(bn(hex(&y, w, &n("conv2"), alphas)?, w, &n("bn2"))?);
    let y = bn(pw(&y, w, &n("conv3"))?, w, &n("bn3"))?;
    Ok(relu(y.add(&short)?))
}

/// Two HexConv+BN+ReLU layers, then max pooling. Returns
/// `(pooled, pre-pool activation)`.
pub fn encoder_forward(
    x: &SphereTensor,
    w: &WeightStore,
    name: &str,
    alphas: &AlphaSet,
) -> Result<(SphereTensor, SphereTensor)> {
    let n = |p: &str| format!("{name}.{p}");
    let y = relu(bn(hex(x, w, &n("conv1"), alphas)?, w, &n("bn1"))?);
    let y = relu(bn(hex(&y, w, &n("conv2"), alphas)?, w, &n("bn2"))?);
    Ok((sphere_pool(&y, PoolMode::Max)?, y))
}

/// Two HexConv+BN+ReLU layers, up-sampling, then 1x1+BN+ReLU.
pub fn decoder_forward(x: &SphereTensor, w: &WeightStore, name: &str, alphas: &AlphaSet) -> Result<SphereTensor> {
    let n = |p: &str| format!("{name}.{p}");
    let y = relu(bn(hex(x, w, &n("conv1"), alphas)?, w, &n("bn1"))?);
    let y = relu(bn(hex(&y, w, &n("conv2"), alphas)?, w, &n("bn2"))?);
    let y = sphere_upsample(&y)?;
    Ok(relu(bn(pw(&y, w, &n("conv3"))?, w, &n("bn3"))?))
}

fn global_max(x: &SphereTensor) -> Vec<f32> {
    (0..x.channels())
        .map(|c| x.components().iter().flat_map(|t| t.channel(c)).fold(f32::NEG_INFINITY, |m, &v| m.max(v)))
        .collect()
}

/// Runs the network on `x`.
pub fn forward(spec: &NetworkSpec, w: &WeightStore, x: &SphereTensor, alphas: &AlphaSet) -> Result<Output> {
    forward_inspect(spec, w, x, alphas, |_, _| {})
}

/// Like [`forward`], calling `inspect(layer, output)` after every layer.
pub fn forward_inspect(
    spec: &NetworkSpec,
    w: &WeightStore,
    x: &SphereTensor,
    alphas: &AlphaSet,
    mut inspect: impl FnMut(usize, &Output),
) -> Result<Output> {
    spec.validate()?;
    w.check(spec)?;
    if x.level() != spec.input_level() || x.channels() != spec.in_channels {
        return Err(Error::Layer {
            layer: 0,
            detail: format!(
                "input is level {} with {} channels, network expects level {} with {}",
                x.level(),
                x.channels(),
                spec.input_level(),
                spec.in_channels
            ),
        });
    }
    let mut cur = Output::Sphere(x.clone());
    let mut skips: Vec<SphereTensor> = Vec::new();
    for (i, l) in spec.layers.iter().enumerate() {
        let wrap = |e: Error| match e {
            Error::Layer { .. } => e,
            e => Error::Layer { layer: i, detail: e.to_string() },
        };
        let prev = core::mem::replace(&mut cur, Output::Logits(Vec::new()));
        let next = (|| -> Result<Output> {
            let input = match prev {
                Output::Sphere(t) if l.concat_skip => {
                    let s = skips.pop().ok_or_else(|| crate::shape_err!("skip stack is empty"))?;
                    Output::Sphere(t.concat_channels(&s)?)
                }
                other => other,
            };
            let (x, v) = match input {
                Output::Sphere(t) => (Some(t), None),
                Output::Logits(v) => (None, Some(v)),
            };
            let sphere_in = || x.ok_or_else(|| crate::shape_err!("layer needs a sphere input"));
            let name = l.name.as_str();
            let out = match l.kind {
                LayerKind::HexConv { bn: with_bn, relu: with_relu } => {
                    let mut y = hex(&sphere_in()?, w, &format!("{name}.conv"), alphas)?;
                    if with_bn {
                        y = bn(y, w, &format!("{name}.bn"))?;
                    }
                    if with_relu {
                        y = relu(y);
                    }
                    y
                }
                LayerKind::Pointwise { bn: with_bn, relu: with_relu } => {
                    let mut y = pw(&sphere_in()?, w, &format!("{name}.conv"))?;
                    if with_bn {
                        y = bn(y, w, &format!("{name}.bn"))?;
                    }
                    if with_relu {
                        y = relu(y);
                    }
                    y
                }
                LayerKind::ResBlock => resblock_forward(&sphere_in()?, w, name, l.stride, alphas)?,
                LayerKind::Encoder => {
                    let (y, skip) = encoder_forward(&sphere_in()?, w, name, alphas)?;
                    if l.push_skip {
                        skips.push(skip);
                    }
                    return Ok(Output::Sphere(y));
                }
                LayerKind::Decoder => decoder_forward(&sphere_in()?, w, name, alphas)?,
                LayerKind::HexConvT => {
                    let y = sphere::sphere_upsample(&sphere_in()?)?;
                    relu(bn(hex(&y, w, &format!("{name}.conv"), alphas)?, w, &format!("{name}.bn"))?)
                }
                LayerKind::GlobalMaxPool => return Ok(Output::Logits(global_max(&sphere_in()?))),
                LayerKind::Dense => {
                    let v = v.ok_or_else(|| crate::shape_err!("dense layer needs a pooled input"))?;
                    let y = tensor::dense(
                        &v,
                        w.get(&format!("{name}.fc.weight"))?,
                        Some(w.get(&format!("{name}.fc.bias"))?),
                    )?;
                    return Ok(Output::Logits(y.into_data()));
                }
            };
            if l.push_skip {
                skips.push(out.clone());
            }
            Ok(Output::Sphere(out))
        })()
        .map_err(wrap)?;
        inspect(i, &next);
        cur = next;
    }
    Ok(cur)
}
