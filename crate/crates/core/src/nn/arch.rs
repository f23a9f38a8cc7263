use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LayerKind, LayerRole, LayerSpec, NetworkSpec, Stride};

const STEM: LayerKind = LayerKind::HexConv { bn: false, relu: true };
const HEAD: LayerKind = LayerKind::HexConv { bn: false, relu: false };
const HEX_BN_RELU: LayerKind = LayerKind::HexConv { bn: true, relu: true };

/// Classifier: HexConv 1->16 at level 4, two down-sampling residual blocks,
/// global max pooling and a 256->10 dense layer.
pub fn build_hexrunet_c() -> NetworkSpec {
    NetworkSpec {
        name: "hexrunet-c".into(),
        in_channels: 1,
        layers: vec![
            LayerSpec::new("conv", STEM, 4, 1, 0, 16).role(LayerRole::Stem),
            LayerSpec::new("block1", LayerKind::ResBlock, 4, 16, 16, 64).stride(Stride::Down),
            LayerSpec::new("block2", LayerKind::ResBlock, 3, 64, 64, 256).stride(Stride::Down),
            LayerSpec::new("pool", LayerKind::GlobalMaxPool, 2, 256, 0, 256),
            LayerSpec::new("fc", LayerKind::Dense, 2, 256, 0, 10).role(LayerRole::Head),
        ],
    }
}

/// Residual U-Net with base width `base` at level 5: five down-sampling
/// residual blocks to level 0, then five up-sampling stages, each followed
/// by a residual block on the concatenation with the matching encoder
/// activation.
pub fn build_hexrunet(in_ch: usize, base: usize, out_ch: usize) -> NetworkSpec {
    let f = base;
    let mut layers = vec![LayerSpec::new("conv_in", STEM, 5, in_ch, 0, f).role(LayerRole::Stem).push()];
    let down =
        [(f, f, 2 * f), (2 * f, 2 * f, 4 * f), (4 * f, 4 * f, 8 * f), (8 * f, 8 * f, 16 * f), (16 * f, 16 * f, 16 * f)];
    for (i, &(a, b, c)) in down.iter().enumerate() {
        let l =
            LayerSpec::new(&format!("down{}", i + 1), LayerKind::ResBlock, 5 - i as u32, a, b, c).stride(Stride::Down);
        layers.push(if i < 4 { l.push() } else { l });
    }
    let up = [(16 * f, 8 * f), (8 * f, 4 * f), (4 * f, 2 * f), (2 * f, f), (f, f)];
    for (i, &(h, c)) in up.iter().enumerate() {
        let level = i as u32;
        layers.push(LayerSpec::new(&format!("up{}", i + 1), LayerKind::HexConvT, level, h, 0, h));
        layers.push(LayerSpec::new(&format!("block{}", i + 1), LayerKind::ResBlock, level + 1, 2 * h, c, c).concat());
    }
    layers.push(LayerSpec::new("conv_out", HEAD, 5, f, 0, out_ch).role(LayerRole::Head));
    NetworkSpec { name: format!("hexrunet-{base}"), in_channels: in_ch, layers }
}

/// U-Net at level 6: four encoders 3->32->64->128->256, four decoders
/// consuming the encoder activations, and three hexagonal convolutions.
pub fn build_hexunet(in_ch: usize, out_ch: usize) -> NetworkSpec {
    let mut layers: Vec<LayerSpec> = Vec::new();
    let enc = [(in_ch, 32), (32, 64), (64, 128), (128, 256)];
    for (i, &(a, c)) in enc.iter().enumerate() {
        layers.push(LayerSpec::new(&format!("enc{}", i + 1), LayerKind::Encoder, 6 - i as u32, a, 0, c).push());
    }
    let dec = [(256, 512, 256), (512, 256, 128), (256, 128, 64), (128, 64, 32)];
    for (i, &(a, b, c)) in dec.iter().enumerate() {
        let l = LayerSpec::new(&format!("dec{}", i + 1), LayerKind::Decoder, 2 + i as u32, a, b, c);
        layers.push(if i == 0 { l } else { l.concat() });
    }
    layers.push(LayerSpec::new("conv1", HEX_BN_RELU, 6, 64, 0, 32).concat());
    layers.push(LayerSpec::new("conv2", HEX_BN_RELU, 6, 32, 0, 32));
    layers.push(LayerSpec::new("conv_out", HEAD, 6, 32, 0, out_ch).role(LayerRole::Head));
    NetworkSpec { name: "hexunet".into(), in_channels: in_ch, layers }
}
