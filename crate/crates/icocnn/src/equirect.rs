//! Equirectangular images and resampling to and from the mesh.
//!
//! Longitude is the vertex azimuth `atan2(z, x)`, so its origin sits on the
//! mean western seam of component 0; it runs over `[-pi, pi)` left to right.
//! Rows run from zenith 0 (north pole, `+y`) to `pi`. Pixel centres sit at
//! half-integer coordinates.

use std::f64::consts::PI;

use icocnn_core::geom::Vec3;
use icocnn_core::{MeshLevel, SphereTensor};

use crate::error::{format_err, Result};

/// A `height x 2 height` image with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectImage {
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Bilinear,
    Nearest,
}

impl EquirectImage {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width != 2 * height {
            return Err(format_err("equirectangular image", format!("{height} x {width} is not 1:2")));
        }
        if channels == 0 || data.len() != height * width * channels {
            return Err(format_err(
                "equirectangular image",
                format!("{} values for {height} x {width} x {channels}", data.len()),
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(format_err("equirectangular image", "non-finite pixel"));
        }
        Ok(Self { height, channels, data })
    }

    /// Builds pixel values from `(row, col, channel)`.
    pub fn from_fn(height: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> f32) -> Self {
        let width = 2 * height;
        let mut data = Vec::with_capacity(height * width * channels);
        for row in 0..height {
            for col in 0..width {
                for c in 0..channels {
                    data.push(f(row, col, c));
                }
            }
        }
        Self { height, channels, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        2 * self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, c: usize) -> f32 {
        self.data[(row * self.width() + col) * self.channels + c]
    }

    /// Longitude and zenith of a pixel centre.
    pub fn pixel_angles(&self, row: usize, col: usize) -> (f64, f64) {
        let lon = (col as f64 + 0.5) / self.width() as f64 * 2.0 * PI - PI;
        let zen = (row as f64 + 0.5) / self.height as f64 * PI;
        (lon, zen)
    }

    fn sample(&self, lon: f64, zen: f64, c: usize, mode: Sampling) -> f32 {
        let (w, h) = (self.width() as f64, self.height as f64);
        let x = (lon + PI) / (2.0 * PI) * w - 0.5;
        let y = zen / PI * h - 0.5;
        let wrap = |i: i64| i.rem_euclid(self.width() as i64) as usize;
        let clamp = |i: i64| i.clamp(0, self.height as i64 - 1) as usize;
        match mode {
            Sampling::Nearest => self.get(clamp(y.round() as i64), wrap(x.round() as i64), c),
            Sampling::Bilinear => {
                let (x0, y0) = (x.floor(), y.floor());
                let (fx, fy) = ((x - x0) as f32, (y - y0) as f32);
                let (x0, y0) = (x0 as i64, y0 as i64);
                let at = |yy: i64, xx: i64| self.get(clamp(yy), wrap(xx), c);
                let top = at(y0, x0) + fx * (at(y0, x0 + 1) - at(y0, x0));
                let bottom = at(y0 + 1, x0) + fx * (at(y0 + 1, x0 + 1) - at(y0 + 1, x0));
                top + fy * (bottom - top)
            }
        }
    }
}

fn direction(lon: f64, zen: f64) -> Vec3 {
    Vec3::from_angles(lon, zen)
}

/// Samples the image at every non-pole vertex.
pub fn equirect_to_sphere(img: &EquirectImage, mesh: &MeshLevel, mode: Sampling) -> SphereTensor {
    let cells = mesh.cell_vertices();
    let w = mesh.width();
    let angles: Vec<(f64, f64)> = cells
        .iter()
        .map(|&v| {
            let p = mesh.positions()[v as usize];
            (p.azimuth(), p.zenith())
        })
        .collect();
    SphereTensor::from_fn(mesh.level(), img.channels, |k, c, row, col| {
        let (lon, zen) = angles[(k * 2 * w + row) * w + col];
        img.sample(lon, zen, c, mode)
    })
}

/// Renders a sphere signal as a `height x 2 height` image. Each pixel
/// interpolates the corners of the mesh face its direction falls in; faces
/// touching a pole take the value of their heaviest non-pole corner.
pub fn sphere_to_equirect(t: &SphereTensor, mesh: &MeshLevel, height: usize) -> Result<EquirectImage> {
    if t.level() != mesh.level() {
        return Err(icocnn_core::Error::LevelMismatch { expected: mesh.level(), found: t.level() }.into());
    }
    if height == 0 {
        return Err(format_err("equirectangular image", "zero height"));
    }
    let value = |v: u32, c: usize| {
        let (k, row, col) = mesh.vertex_to_grid(v).expect("non-pole vertex");
        t.get(k, c, row, col)
    };
    let mut out = EquirectImage::from_fn(height, t.channels(), |_, _, _| 0.0);
    let width = 2 * height;
    for row in 0..height {
        for col in 0..width {
            let (lon, zen) = out.pixel_angles(row, col);
            let (f, bary) = mesh.locate(direction(lon, zen));
            let corners = mesh.faces()[f];
            let pixel = &mut out.data[(row * width + col) * t.channels()..][..t.channels()];
            if corners.iter().any(|&v| mesh.is_pole(v)) {
                let best = (0..3)
                    .filter(|&i| !mesh.is_pole(corners[i]))
                    .max_by(|&i, &j| bary[i].total_cmp(&bary[j]))
                    .expect("a face has at most one pole");
                for (c, px) in pixel.iter_mut().enumerate() {
                    *px = value(corners[best], c);
                }
            } else {
                for (c, px) in pixel.iter_mut().enumerate() {
                    *px = (0..3).map(|i| bary[i] * f64::from(value(corners[i], c))).sum::<f64>() as f32;
                }
            }
        }
    }
    Ok(out)
}

/// Perspective image size `(height, width)` matched to a mesh level for
/// comparisons with planar networks.
pub fn perspective_resolution(level: u32) -> Option<(usize, usize)> {
    match level {
        6 => Some((48, 80)),
        7 => Some((96, 160)),
        8 => Some((192, 320)),
        _ => None,
    }
}

/// Inverse of [`perspective_resolution`].
pub fn level_for_perspective(height: usize, width: usize) -> Option<u32> {
    (6..=8).find(|&r| perspective_resolution(r) == Some((height, width)))
}

/// Equirectangular height whose equator has about as many pixels as the
/// level has vertices around it (`5 W`).
pub fn default_equirect_height(level: u32) -> usize {
    ((5usize << level) / 2).max(2)
}
