//! Side-by-side rendering of the five components.

use icocnn_core::SphereTensor;
use image::{Rgb, RgbImage};

use crate::error::{format_err, Result};

/// How channels become pixel colours.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelMap {
    /// One channel, linearly mapped from `[min, max]` to grey.
    Gray { channel: usize, min: f32, max: f32 },
    /// Three channels as red, green and blue, each mapped from `[min, max]`.
    Rgb { channels: [usize; 3], min: f32, max: f32 },
    /// One channel of integer class labels, coloured by [`label_color`].
    Labels { channel: usize },
    /// Per-cell argmax over all channels, coloured by [`label_color`].
    Argmax,
}

/// Colour of class `label`: the bits of the label are spread over the
/// high bits of the three channels, so distinct labels below `2^24` get
/// distinct colours and small labels are far apart.
pub fn label_color(label: u32) -> [u8; 3] {
    let mut rgb = [0u8; 3];
    let mut l = label;
    for bit in (0..8).rev() {
        for (c, v) in rgb.iter_mut().enumerate() {
            *v |= (((l >> c) & 1) as u8) << bit;
        }
        l >>= 3;
    }
    rgb
}

fn scale(x: f32, min: f32, max: f32) -> u8 {
    let t = if max > min { (x - min) / (max - min) } else { 0.0 };
    (t.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Tiles component `k` at columns `k W .. (k+1) W` of a `2W x 5W` image.
pub fn export_unfolded(t: &SphereTensor, map: &ChannelMap) -> Result<RgbImage> {
    let check = |c: usize| {
        if c < t.channels() {
            Ok(())
        } else {
            Err(format_err("channel map", format!("channel {c} of a {}-channel signal", t.channels())))
        }
    };
    match map {
        ChannelMap::Gray { channel, .. } | ChannelMap::Labels { channel } => check(*channel)?,
        ChannelMap::Rgb { channels, .. } => channels.iter().try_for_each(|&c| check(c))?,
        ChannelMap::Argmax => {}
    }
    let w = t.width();
    let mut img = RgbImage::new(5 * w as u32, 2 * w as u32);
    for k in 0..5 {
        for row in 0..2 * w {
            for col in 0..w {
                let at = |c: usize| t.get(k, c, row, col);
                let px = match *map {
                    ChannelMap::Gray { channel, min, max } => [scale(at(channel), min, max); 3],
                    ChannelMap::Rgb { channels, min, max } => channels.map(|c| scale(at(c), min, max)),
                    ChannelMap::Labels { channel } => label_color(at(channel).round().max(0.0) as u32),
                    ChannelMap::Argmax => {
                        let best = (0..t.channels()).max_by(|&a, &b| at(a).total_cmp(&at(b))).unwrap_or(0);
                        label_color(best as u32)
                    }
                };
                img.put_pixel((k * w + col) as u32, row as u32, Rgb(px));
            }
        }
    }
    Ok(img)
}
