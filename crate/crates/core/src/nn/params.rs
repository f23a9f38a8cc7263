use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LayerKind, LayerRole, LayerSpec, NetworkSpec};
use crate::{Error, Result, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParamRole {
    /// `C_out x C_in x 7` hexagonal taps.
    HexWeight,
    /// `C_out x C_in` 1x1 or dense weights.
    Weight,
    Bias,
    BnGamma,
    BnBeta,
    BnMean,
    BnVar,
}

impl ParamRole {
    /// Running statistics are stored but are not trainable parameters.
    pub fn counted(self) -> bool {
        !matches!(self, ParamRole::BnMean | ParamRole::BnVar)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamRole::HexWeight => "hex_weight",
            ParamRole::Weight => "weight",
            ParamRole::Bias => "bias",
            ParamRole::BnGamma => "bn_gamma",
            ParamRole::BnBeta => "bn_beta",
            ParamRole::BnMean => "bn_mean",
            ParamRole::BnVar => "bn_var",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ParamRole::HexWeight,
            ParamRole::Weight,
            ParamRole::Bias,
            ParamRole::BnGamma,
            ParamRole::BnBeta,
            ParamRole::BnMean,
            ParamRole::BnVar,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub role: ParamRole,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Params<'a> {
    prefix: &'a str,
    out: Vec<ParamSpec>,
}

impl Params<'_> {
    fn push(&mut self, name: &str, shape: Vec<usize>, role: ParamRole) {
        self.out.push(ParamSpec { name: format!("{}.{name}", self.prefix), shape, role });
    }

    fn hex(&mut self, name: &str, a: usize, c: usize) {
        self.push(&format!("{name}.weight"), vec![c, a, 7], ParamRole::HexWeight);
        self.push(&format!("{name}.bias"), vec![c], ParamRole::Bias);
    }

    fn pw(&mut self, name: &str, a: usize, c: usize) {
        self.push(&format!("{name}.weight"), vec![c, a], ParamRole::Weight);
        self.push(&format!("{name}.bias"), vec![c], ParamRole::Bias);
    }

    fn bn(&mut self, name: &str, c: usize) {
        for (p, role) in [
            ("gamma", ParamRole::BnGamma),
            ("beta", ParamRole::BnBeta),
            ("mean", ParamRole::BnMean),
            ("var", ParamRole::BnVar),
        ] {
            self.push(&format!("{name}.{p}"), vec![c], role);
        }
    }
}

/// Parameters of one layer, in a fixed order.
pub fn layer_params(l: &LayerSpec) -> Vec<ParamSpec> {
    let mut p = Params { prefix: &l.name, out: Vec::new() };
    let (a, b, c) = (l.a, l.b, l.c);
    match l.kind {
        LayerKind::HexConv { bn, .. } => {
            p.hex("conv", a, c);
            if bn {
                p.bn("bn", c);
            }
        }
        LayerKind::Pointwise { bn, .. } => {
            p.pw("conv", a, c);
            if bn {
                p.bn("bn", c);
            }
        }
        LayerKind::ResBlock => {
            p.pw("shortcut", a, c);
            p.bn("shortcut_bn", c);
            p.pw("conv1", a, b);
            p.bn("bn1", b);
            p.hex("conv2", b, b);
            p.bn("bn2", b);
            p.pw("conv3", b, c);
            p.bn("bn3", c);
        }
        LayerKind::Encoder => {
            p.hex("conv1", a, c);
            p.bn("bn1", c);
            p.hex("conv2", c, c);
            p.bn("bn2", c);
        }
        LayerKind::Decoder => {
            p.hex("conv1", a, b);
            p.bn("bn1", b);
            p.hex("conv2", b, b);
            p.bn("bn2", b);
            p.pw("conv3", b, c);
            p.bn("bn3", c);
        }
        LayerKind::HexConvT => {
            p.hex("conv", a, c);
            p.bn("bn", c);
        }
        LayerKind::GlobalMaxPool => {}
        LayerKind::Dense => p.pw("fc", a, c),
    }
    p.out
}

/// How trainable parameters are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convention {
    /// Weights per hexagonal kernel: 7, or 9 when the masked 3x3 kernels
    /// are counted densely.
    pub hex_taps: usize,
    /// Count the stem convolution as 1x1.
    pub pointwise_stem: bool,
    /// Count the output convolution as 1x1.
    pub pointwise_head: bool,
    /// Count the convolution inside HexConvT as 1x1.
    pub pointwise_upconv: bool,
}

impl Convention {
    /// Seven weights per hexagonal kernel, every layer as specified.
    pub const CANONICAL: Convention =
        Convention { hex_taps: 7, pointwise_stem: false, pointwise_head: false, pointwise_upconv: false };

    /// Dense 3x3 storage of the hexagonal kernels with 1x1 stem, head and
    /// up-sampling convolutions.
    pub const DENSE_MASKS: Convention =
        Convention { hex_taps: 9, pointwise_stem: true, pointwise_head: true, pointwise_upconv: true };

    fn taps(&self, l: &LayerSpec) -> usize {
        let pointwise = match (l.role, l.kind) {
            (LayerRole::Stem, _) => self.pointwise_stem,
            (LayerRole::Head, _) => self.pointwise_head,
            (_, LayerKind::HexConvT) => self.pointwise_upconv,
            _ => false,
        };
        if pointwise {
            1
        } else {
            self.hex_taps
        }
    }
}

/// Trainable parameters of one layer under `conv`.
fn layer_count(l: &LayerSpec, conv: &Convention) -> usize {
    layer_params(l)
        .iter()
        .filter(|p| p.role.counted())
        .map(|p| match p.role {
            ParamRole::HexWeight => p.len() / 7 * conv.taps(l),
            _ => p.len(),
        })
        .sum()
}

/// Trainable parameters: hexagonal convolutions `7 a c + c`, 1x1 and dense
/// layers `a c + c`, batch-norm `2 c`.
pub fn count_params(spec: &NetworkSpec) -> usize {
    count_params_with(spec, &Convention::CANONICAL)
}

pub fn count_params_with(spec: &NetworkSpec, conv: &Convention) -> usize {
    spec.layers.iter().map(|l| layer_count(l, conv)).sum()
}

/// One row of the per-layer parameter audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub index: usize,
    pub name: String,
    pub kind: &'static str,
    pub level: u32,
    pub channels: (usize, usize, usize),
    pub canonical: usize,
    pub alternative: usize,
}

/// Per-layer counts under the canonical and an alternative convention.
pub fn audit(spec: &NetworkSpec, alternative: &Convention) -> Vec<AuditRow> {
    spec.layers
        .iter()
        .enumerate()
        .map(|(index, l)| AuditRow {
            index,
            name: l.name.clone(),
            kind: l.kind.name(),
            level: l.level,
            channels: (l.a, l.b, l.c),
            canonical: layer_count(l, &Convention::CANONICAL),
            alternative: layer_count(l, alternative),
        })
        .collect()
}

/// Named parameter tensors of a network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightStore {
    tensors: BTreeMap<String, Tensor>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every parameter zero, except unit batch-norm scale and variance.
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self::init(spec, |p| match p.role {
            ParamRole::BnGamma | ParamRole::BnVar => 1.0,
            _ => 0.0,
        })
    }

    /// Seeded random weights: uniform with variance `2 / fan_in` for
    /// convolution and dense weights, small random biases and batch-norm
    /// statistics near the identity.
    pub fn random(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init(spec, |p| match p.role {
            ParamRole::HexWeight | ParamRole::Weight => {
                let fan_in: usize = p.shape[1..].iter().product();
                let bound = libm::sqrtf(6.0 / fan_in as f32);
                rng.gen_range(-bound..bound)
            }
            ParamRole::Bias | ParamRole::BnBeta | ParamRole::BnMean => rng.gen_range(-0.1..0.1),
            ParamRole::BnGamma => rng.gen_range(0.8..1.2),
            ParamRole::BnVar => rng.gen_range(0.5..1.5),
        })
    }

    fn init(spec: &NetworkSpec, mut f: impl FnMut(&ParamSpec) -> f32) -> Self {
        let mut store = Self::new();
        for l in &spec.layers {
            for p in layer_params(l) {
                let t = Tensor::from_fn(&p.shape, |_| f(&p));
                store.tensors.insert(p.name, t);
            }
        }
        store
    }

    pub fn insert(&mut self, name: &str, t: Tensor) {
        self.tensors.insert(name.into(), t);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors.get(name).ok_or_else(|| Error::MissingParam(name.into()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.tensors.get_mut(name).ok_or_else(|| Error::MissingParam(name.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Checks that every parameter of `spec` is present with its shape.
    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        for (i, l) in spec.layers.iter().enumerate() {
            for p in layer_params(l) {
                let t = self.get(&p.name)?;
                if t.shape() != p.shape.as_slice() {
                    return Err(Error::Layer {
                        layer: i,
                        detail: format!("`{}` has shape {:?}, expected {:?}", p.name, t.shape(), p.shape),
                    });
                }
            }
        }
        Ok(())
    }

    /// Trainable values of `spec` in layer/parameter order.
    pub fn flatten_trainable(&self, spec: &NetworkSpec) -> Result<Vec<f32>> {
        let mut out = Vec::new();
        for l in &spec.layers {
            for p in layer_params(l).iter().filter(|p| p.role.counted()) {
                out.extend_from_slice(self.get(&p.name)?.data());
            }
        }
        Ok(out)
    }
}
