//! Network specifications, parameter bookkeeping and forward inference.
//!
//! A [`NetworkSpec`] is a flat list of [`LayerSpec`] rows. Skip connections
//! are expressed with two flags: a row with `push_skip` saves an activation
//! (for an encoder, its pre-pool activation) and a row with `concat_skip`
//! pops the most recent one and concatenates it after its input.

mod arch;
mod forward;
mod params;
mod transfer;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

pub use arch::{build_hexrunet, build_hexrunet_c, build_hexunet};
pub use forward::{decoder_forward, encoder_forward, forward, forward_inspect, resblock_forward, AlphaSet, Output};
pub use params::{
    audit, count_params, count_params_with, layer_params, AuditRow, Convention, ParamRole, ParamSpec, WeightStore,
};
pub use transfer::{transfer_weights, PerspectiveKernel};

/// Resolution change of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stride {
    /// Same level.
    One,
    /// `s = 2`: one level coarser.
    Down,
    /// `s = 0.5`: one level finer.
    Up,
}

impl Stride {
    pub fn apply(self, level: u32) -> Option<u32> {
        match self {
            Stride::One => Some(level),
            Stride::Down => level.checked_sub(1),
            Stride::Up => Some(level + 1),
        }
    }
}

impl fmt::Display for Stride {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stride::One => "1",
            Stride::Down => "2",
            Stride::Up => "0.5",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Hexagonal convolution `a -> c`, optionally followed by BN and ReLU.
    HexConv { bn: bool, relu: bool },
    /// 1x1 convolution `a -> c`, optionally followed by BN and ReLU.
    Pointwise { bn: bool, relu: bool },
    /// Bottleneck residual block `a -> b -> c`.
    ResBlock,
    /// Two HexConv+BN+ReLU layers `a -> c -> c`, then max pooling.
    Encoder,
    /// Two HexConv+BN+ReLU layers `a -> b -> b`, up-sampling, 1x1+BN+ReLU
    /// `b -> c`.
    Decoder,
    /// Up-sampling, HexConv `a -> c`, BN, ReLU.
    HexConvT,
    /// Maximum over every cell of every component, per channel.
    GlobalMaxPool,
    /// Fully connected `a -> c`.
    Dense,
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::HexConv { .. } => "HexConv",
            LayerKind::Pointwise { .. } => "Pointwise",
            LayerKind::ResBlock => "ResBlock",
            LayerKind::Encoder => "Encoder",
            LayerKind::Decoder => "Decoder",
            LayerKind::HexConvT => "HexConvT",
            LayerKind::GlobalMaxPool => "MaxPool",
            LayerKind::Dense => "Dense",
        }
    }
}

/// Position of a layer in the network, used by alternative counting
/// conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRole {
    Stem,
    Body,
    Head,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    /// Input level.
    pub level: u32,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub stride: Stride,
    pub concat_skip: bool,
    pub push_skip: bool,
    pub role: LayerRole,
}

impl LayerSpec {
    pub fn new(name: &str, kind: LayerKind, level: u32, a: usize, b: usize, c: usize) -> Self {
        let stride = match kind {
            LayerKind::Encoder => Stride::Down,
            LayerKind::Decoder | LayerKind::HexConvT => Stride::Up,
            _ => Stride::One,
        };
        Self {
            name: name.into(),
            kind,
            level,
            a,
            b,
            c,
            stride,
            concat_skip: false,
            push_skip: false,
            role: LayerRole::Body,
        }
    }

    pub fn stride(mut self, s: Stride) -> Self {
        self.stride = s;
        self
    }

    pub fn concat(mut self) -> Self {
        self.concat_skip = true;
        self
    }

    pub fn push(mut self) -> Self {
        self.push_skip = true;
        self
    }

    pub fn role(mut self, role: LayerRole) -> Self {
        self.role = role;
        self
    }

    /// Output level; `None` for the global pool and dense head, which leave
    /// the sphere.
    pub fn out_level(&self) -> Option<u32> {
        match self.kind {
            LayerKind::GlobalMaxPool | LayerKind::Dense => None,
            _ => self.stride.apply(self.level),
        }
    }

    /// Channels of the activation saved by `push_skip`.
    fn skip_channels(&self) -> usize {
        self.c
    }

    /// Level of the activation saved by `push_skip`.
    fn skip_level(&self) -> u32 {
        match self.kind {
            LayerKind::Encoder => self.level,
            _ => self.out_level().unwrap_or(self.level),
        }
    }
}

/// An ordered list of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    pub in_channels: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn input_level(&self) -> u32 {
        self.layers.first().map_or(0, |l| l.level)
    }

    /// Every sphere level a layer runs at.
    pub fn levels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.layers.iter().flat_map(|l| [Some(l.level), l.out_level()]).flatten().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The same network shifted to take input at `level`.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        let shift = i64::from(level) - i64::from(self.input_level());
        let mut out = self.clone();
        for (i, l) in out.layers.iter_mut().enumerate() {
            let r = i64::from(l.level) + shift;
            if !(0..=i64::from(crate::mesh::MAX_LEVEL)).contains(&r) {
                return Err(Error::Layer { layer: i, detail: alloc::format!("level {r} out of range") });
            }
            l.level = r as u32;
        }
        out.validate()?;
        Ok(out)
    }

    /// Checks that levels and channel counts chain, including the skip
    /// stack.
    pub fn validate(&self) -> Result<()> {
        let err = |layer: usize, detail: String| Err(Error::Layer { layer, detail });
        let mut level = Some(self.input_level());
        let mut ch = self.in_channels;
        let mut skips: Vec<(u32, usize)> = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            let mut a = ch;
            if l.concat_skip {
                let Some((sl, sc)) = skips.pop() else {
                    return err(i, "skip stack is empty".into());
                };
                if Some(sl) != level {
                    return err(i, alloc::format!("skip at level {sl}, input at {level:?}"));
                }
                a += sc;
            }
            match l.kind {
                LayerKind::Dense => {
                    if level.is_some() {
                        return err(i, "dense layer needs a pooled input".into());
                    }
                }
                _ if level != Some(l.level) => {
                    return err(i, alloc::format!("input at level {level:?}, layer expects {}", l.level));
                }
                _ => {}
            }
            if a != l.a {
                return err(i, alloc::format!("{a} input channels, layer expects {}", l.a));
            }
            if l.out_level().is_none() && !matches!(l.kind, LayerKind::GlobalMaxPool | LayerKind::Dense) {
                return err(i, "stride leaves the supported level range".into());
            }
            if l.push_skip {
                skips.push((l.skip_level(), l.skip_channels()));
            }
            level = l.out_level();
            ch = l.c;
        }
        if !skips.is_empty() {
            return err(self.layers.len(), alloc::format!("{} unused skip activations", skips.len()));
        }
        Ok(())
    }

    pub fn out_channels(&self) -> usize {
        self.layers.last().map_or(self.in_channels, |l| l.c)
    }
}
