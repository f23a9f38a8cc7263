//! 8-bit PGM/PPM input and output for equirectangular images.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::equirect::EquirectImage;
use crate::error::{format_err, Result};

/// Reads a PGM (one channel) or PPM (three channels); pixel values keep
/// their 0..255 range so label images survive unchanged.
pub fn read_pnm(path: &Path) -> Result<EquirectImage> {
    let img = image::ImageReader::open(path)
        .map_err(|source| crate::Error::Io { path: path.to_path_buf(), source })?
        .with_guessed_format()?
        .decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => EquirectImage::new(h, w, 1, g.into_raw().into_iter().map(f32::from).collect()),
        other => EquirectImage::new(h, w, 3, other.into_rgb8().into_raw().into_iter().map(f32::from).collect()),
    }
}

fn to_u8(x: f32) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

/// Writes a one-channel image as PGM and a three-channel image as PPM,
/// rounding and clamping to 0..255.
pub fn write_pnm(path: &Path, img: &EquirectImage) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|&x| to_u8(x)).collect();
    match img.channels() {
        1 => GrayImage::from_raw(w, h, bytes).expect("sized buffer").save_with_format(path, ImageFormat::Pnm)?,
        3 => RgbImage::from_raw(w, h, bytes).expect("sized buffer").save_with_format(path, ImageFormat::Pnm)?,
        c => return Err(format_err("image", format!("{c} channels cannot be stored as PGM/PPM"))),
    }
    Ok(())
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, ImageFormat::Pnm)?;
    Ok(())
}
